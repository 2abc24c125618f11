#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "recembed/corpus/feature_store.hpp"
#include "recembed/corpus/recipe.hpp"

namespace recembed::corpus {

struct LoadError {
  int line = 0;
  std::string field;
  std::string message;
};

struct LoadResult {
  std::vector<Recipe> recipes;
  std::vector<LoadError> errors;
};

// JSON-lines corpus: one record per line with fields id, title, ingredients[],
// instructions[], class_id, image_feature_ref. Malformed lines land in the
// error report with their line number.
LoadResult load_corpus(const std::filesystem::path& path);
void save_corpus(const std::filesystem::path& path, const std::vector<Recipe>& recipes);

// Feature store: header "D=<int>", then "<id> <f1> ... <fD>" per line.
FeatureStore load_feature_store(const std::filesystem::path& path);
void save_feature_store(const std::filesystem::path& path, const FeatureStore& store);

// One "token<TAB>id" pair per line, including the reserved entries.
Vocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);

CorpusSplit load_split(const std::filesystem::path& path);
void save_split(const std::filesystem::path& path, const CorpusSplit& split);

std::vector<TokenizedRecipe> load_tokenized(const std::filesystem::path& path);
void save_tokenized(const std::filesystem::path& path, const std::vector<TokenizedRecipe>& recipes);

}  // namespace recembed::corpus
