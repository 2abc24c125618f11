#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace recembed::corpus {

struct Recipe {
  std::string id;
  std::string title;
  std::vector<std::string> ingredients;   // one line per ingredient
  std::vector<std::string> instructions;  // one sentence per entry
  int class_id = 0;
  std::string image_feature_ref;
};

struct TokenizedRecipe {
  std::string id;
  std::vector<std::vector<int>> ingredient_tokens;  // per ingredient line
  std::vector<int> instruction_tokens;              // flat, trimmed
  std::vector<int> instruction_lens;                // partition of the flat sequence
  int class_id = 0;
  std::string image_feature_ref;

  int total_instruction_tokens() const { return int(instruction_tokens.size()); }

  bool boundaries_partition() const {
    return std::accumulate(instruction_lens.begin(), instruction_lens.end(), 0) ==
           total_instruction_tokens();
  }

  std::vector<int> flat_ingredient_tokens() const {
    std::vector<int> out;
    for (const auto& line : ingredient_tokens) out.insert(out.end(), line.begin(), line.end());
    return out;
  }
};

class Vocabulary {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kUnkId = 1;

  Vocabulary() : id_to_token_{"<pad>", "<unk>"} {}

  int add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    const int id = int(id_to_token_.size());
    token_to_id_.emplace(token, id);
    id_to_token_.push_back(token);
    return id;
  }

  // kUnkId for out-of-vocabulary tokens.
  int id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
  }

  bool contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

  const std::string& token(int id) const {
    if (id < 0 || id >= int(id_to_token_.size()))
      throw std::out_of_range("Vocabulary::token: id out of range");
    return id_to_token_[std::size_t(id)];
  }

  int size() const { return int(id_to_token_.size()); }

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  bool disjoint() const {
    std::unordered_set<std::string> seen;
    for (const auto* part : {&train, &validation, &test})
      for (const auto& id : *part)
        if (!seen.insert(id).second) return false;
    return true;
  }
};

}  // namespace recembed::corpus
