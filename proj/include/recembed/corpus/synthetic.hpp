#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "recembed/corpus/feature_store.hpp"
#include "recembed/corpus/recipe.hpp"

namespace recembed::corpus {

// Controls for the synthetic corpus: class-specific ingredient pools and
// instruction templates, with image features manufactured as a frozen random
// projection of each recipe's bag-of-ingredients plus Gaussian noise.
struct GeneratorSpec {
  int num_classes = 20;
  int recipes_per_class = 100;
  int ingredient_pool_per_class = 12;
  int min_ingredients = 3;
  int max_ingredients = 6;
  int min_instructions = 2;
  int max_instructions = 4;
  int feature_dim = 64;
  double sigma = 0.1;
  double train_frac = 0.55;
  double val_frac = 0.15;

  void validate() const {
    if (num_classes <= 0) throw std::invalid_argument("generator.num_classes must be positive");
    if (recipes_per_class <= 0)
      throw std::invalid_argument("generator.recipes_per_class must be positive");
    if (ingredient_pool_per_class <= 0)
      throw std::invalid_argument("generator.ingredient_pool_per_class must be positive");
    if (min_ingredients <= 0 || max_ingredients < min_ingredients ||
        max_ingredients > ingredient_pool_per_class)
      throw std::invalid_argument("generator: ingredient range invalid");
    if (min_instructions <= 0 || max_instructions < min_instructions)
      throw std::invalid_argument("generator: instruction range invalid");
    if (feature_dim <= 0) throw std::invalid_argument("generator.feature_dim must be positive");
    if (sigma < 0) throw std::invalid_argument("generator.sigma must be non-negative");
    if (train_frac <= 0 || val_frac < 0 || train_frac + val_frac >= 1.0)
      throw std::invalid_argument("generator: split fractions invalid");
  }
};

struct SyntheticCorpus {
  std::vector<Recipe> recipes;
  FeatureStore features;
  Eigen::MatrixXd projection;                 // feature_dim x ingredient vocabulary
  std::vector<std::string> ingredient_names;  // global ingredient index -> token

  // Noise-free feature of a recipe: projection applied to its ingredient bag.
  Eigen::VectorXd clean_feature(const Recipe& r) const;
  Eigen::VectorXd bag_of_ingredients(const Recipe& r) const;
};

SyntheticCorpus generate_synthetic_corpus(const GeneratorSpec& spec, std::uint64_t seed);

CorpusSplit stratified_split(const std::vector<Recipe>& recipes, double train_frac,
                             double val_frac, std::uint64_t seed);

}  // namespace recembed::corpus
