#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "recembed/model/params.hpp"

namespace recembed::train {

using recembed::model::NamedParam;

struct NonFiniteGradient : std::runtime_error {
  explicit NonFiniteGradient(const std::string& param)
      : std::runtime_error("non-finite gradient in parameter '" + param + "'"), parameter(param) {}
  std::string parameter;
};

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename S>
struct AdamState {
  struct Tensor {
    recembed::ad::Mat<S> m, v;
    long t = 0;
  };
  std::unordered_map<std::string, Tensor> tensors;
};

// One Adam update over the given parameter slice; reads each Var's
// accumulated gradient and mutates its value in place.
template <typename S>
void adam_step(std::vector<NamedParam<S>>& params, AdamState<S>& state, double lr,
               const AdamOptions& opt = {}) {
  for (auto& p : params) {
    auto& g = p.var.grad();
    if (!g.allFinite()) throw NonFiniteGradient(p.name);
    auto& t = state.tensors[p.name];
    if (t.m.size() == 0) {
      t.m = recembed::ad::Mat<S>::Zero(g.rows(), g.cols());
      t.v = recembed::ad::Mat<S>::Zero(g.rows(), g.cols());
    }
    ++t.t;
    t.m = S(opt.beta1) * t.m + S(1 - opt.beta1) * g;
    t.v = (S(opt.beta2) * t.v.array() + S(1 - opt.beta2) * g.array().square()).matrix();
    const S c1 = S(1) - S(std::pow(opt.beta1, double(t.t)));
    const S c2 = S(1) - S(std::pow(opt.beta2, double(t.t)));
    p.var.value().array() -=
        S(lr) * (t.m.array() / c1) / ((t.v.array() / c2).sqrt() + S(opt.eps));
  }
}

}  // namespace recembed::train
