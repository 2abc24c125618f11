#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace recembed::corpus {

// Precomputed image features keyed by reference id. Entry order is preserved
// so writes are reproducible.
struct FeatureStore {
  int dim = 0;
  std::vector<std::pair<std::string, Eigen::VectorXd>> entries;
  std::unordered_map<std::string, std::size_t> index;

  void add(std::string id, Eigen::VectorXd values) {
    if (dim == 0) dim = int(values.size());
    if (int(values.size()) != dim)
      throw std::invalid_argument("FeatureStore: feature '" + id + "' has wrong dimension");
    if (index.count(id)) throw std::invalid_argument("FeatureStore: duplicate id '" + id + "'");
    index.emplace(id, entries.size());
    entries.emplace_back(std::move(id), std::move(values));
  }

  bool contains(const std::string& id) const { return index.count(id) > 0; }

  const Eigen::VectorXd& at(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end())
      throw std::out_of_range("FeatureStore: no feature for id '" + id + "'");
    return entries[it->second].second;
  }

  std::size_t size() const { return entries.size(); }
};

}  // namespace recembed::corpus
