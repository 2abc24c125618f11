#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "recembed/corpus/feature_store.hpp"
#include "recembed/corpus/recipe.hpp"

namespace recembed::train {

// Tokenized recipes joined with their image features and split assignment;
// everything the trainer and evaluator need, indexed once.
struct Dataset {
  std::vector<corpus::TokenizedRecipe> recipes;
  corpus::FeatureStore features;
  std::vector<int> train, validation, test;  // indices into recipes
  int num_classes = 0;
  std::vector<std::vector<int>> train_by_class;

  const Eigen::VectorXd& feature_of(int idx) const {
    return features.at(recipes[std::size_t(idx)].image_feature_ref);
  }
  int class_of(int idx) const { return recipes[std::size_t(idx)].class_id; }
};

inline Dataset build_dataset(std::vector<corpus::TokenizedRecipe> recipes,
                             corpus::FeatureStore features, const corpus::CorpusSplit& split) {
  Dataset data;
  data.recipes = std::move(recipes);
  data.features = std::move(features);

  std::unordered_map<std::string, int> by_id;
  for (std::size_t i = 0; i < data.recipes.size(); ++i) {
    const auto& r = data.recipes[i];
    if (!by_id.emplace(r.id, int(i)).second)
      throw std::invalid_argument("build_dataset: duplicate recipe id '" + r.id + "'");
    if (r.class_id < 0)
      throw std::invalid_argument("build_dataset: negative class id on '" + r.id + "'");
    if (!data.features.contains(r.image_feature_ref))
      throw std::invalid_argument("build_dataset: missing image feature '" + r.image_feature_ref +
                                  "'");
    data.num_classes = std::max(data.num_classes, r.class_id + 1);
  }

  auto resolve = [&](const std::vector<std::string>& ids, std::vector<int>& out) {
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw std::invalid_argument("build_dataset: split references unknown id '" + id + "'");
      out.push_back(it->second);
    }
  };
  resolve(split.train, data.train);
  resolve(split.validation, data.validation);
  resolve(split.test, data.test);

  data.train_by_class.resize(std::size_t(data.num_classes));
  for (int idx : data.train) data.train_by_class[std::size_t(data.class_of(idx))].push_back(idx);
  return data;
}

}  // namespace recembed::train
