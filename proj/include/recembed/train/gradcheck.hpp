#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "recembed/core/rng.hpp"
#include "recembed/model/params.hpp"

namespace recembed::train {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0;
  std::string worst;

  bool pass(double tol) const { return max_rel_err <= tol; }
};

// Compares analytic gradients against central finite differences (step 1e-6,
// scaled by parameter magnitude) at `probes` random coordinates per tensor.
// The relative-error denominator is floored at 1e-4, which absorbs the
// ~1e-10 roundoff of central differences on order-one losses.
inline GradCheckReport check_gradients(std::vector<model::NamedParam<double>> params,
                                       const std::function<ad::Var<double>()>& loss_builder,
                                       int probes, std::uint64_t seed) {
  auto loss = loss_builder();
  ad::backward(loss);
  std::vector<ad::Mat<double>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) analytic.push_back(p.var.grad());
  for (auto& p : params) p.var.zero_grad();

  GradCheckReport report;
  Rng rng(derive_seed(seed, 0x9cadc4ec4ULL));
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& var = params[pi].var;
    GradCheckEntry entry;
    entry.name = params[pi].name;
    const Eigen::Index size = var.value().size();
    for (int probe = 0; probe < probes; ++probe) {
      const Eigen::Index flat = Eigen::Index(rng.next_below(std::uint64_t(size)));
      const Eigen::Index i = flat % var.value().rows();
      const Eigen::Index j = flat / var.value().rows();
      const double theta = var.value()(i, j);
      const double h = 1e-6 * std::max(1.0, std::abs(theta));
      var.value()(i, j) = theta + h;
      const double up = loss_builder().value()(0, 0);
      var.value()(i, j) = theta - h;
      const double down = loss_builder().value()(0, 0);
      var.value()(i, j) = theta;
      const double fd = (up - down) / (2 * h);
      const double a = analytic[pi](i, j);
      const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-4});
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    if (entry.max_rel_err > report.max_rel_err) {
      report.max_rel_err = entry.max_rel_err;
      report.worst = entry.name;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace recembed::train
