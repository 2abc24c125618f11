#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "recembed/eval/evaluate.hpp"
#include "recembed/model/text_encoder.hpp"

namespace recembed::eval {

// Ingredient-attention scores aligned to the trimmed instruction tokens; one
// row per attention query, one column per token.
struct AttentionDump {
  std::string recipe_id;
  std::vector<std::string> tokens;
  Eigen::MatrixXd weights;  // n x tokens.size()
};

template <typename S>
AttentionDump export_attention(model::Model<S>& m, const corpus::TokenizedRecipe& recipe,
                               const corpus::Vocabulary& vocab) {
  auto enc = model::encode_recipe(recipe, m, /*want_attention=*/true);
  AttentionDump dump;
  dump.recipe_id = recipe.id;
  const int len = recipe.total_instruction_tokens();
  dump.tokens.reserve(std::size_t(len));
  for (int t = 0; t < len; ++t)
    dump.tokens.push_back(vocab.token(recipe.instruction_tokens[std::size_t(t)]));
  dump.weights = enc.attention.leftCols(len).template cast<double>();
  return dump;
}

inline std::string format_weight(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline void write_attention_tsv(std::ostream& out, const AttentionDump& dump) {
  out << "recipe_id\t" << dump.recipe_id << '\n';
  out << "token";
  for (const auto& t : dump.tokens) out << '\t' << t;
  out << '\n';
  for (Eigen::Index r = 0; r < dump.weights.rows(); ++r) {
    out << 'q' << r;
    for (Eigen::Index c = 0; c < dump.weights.cols(); ++c)
      out << '\t' << format_weight(dump.weights(r, c));
    out << '\n';
  }
}

// One row per (sample, modality): id, modality, class id, then the e
// embedding values. `top_classes` > 0 keeps only the most frequent classes.
template <typename S>
void export_embeddings(model::Model<S>& m, const train::Dataset& data,
                       const std::vector<int>& indices, std::ostream& out, int top_classes = 0) {
  std::vector<int> kept = indices;
  if (top_classes > 0) {
    std::unordered_map<int, int> counts;
    for (int idx : indices) ++counts[data.class_of(idx)];
    std::vector<std::pair<int, int>> ordered(counts.begin(), counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (int(ordered.size()) > top_classes) ordered.resize(std::size_t(top_classes));
    std::vector<bool> keep_class(std::size_t(data.num_classes), false);
    for (const auto& [cls, cnt] : ordered) keep_class[std::size_t(cls)] = true;
    kept.clear();
    for (int idx : indices)
      if (keep_class[std::size_t(data.class_of(idx))]) kept.push_back(idx);
  }

  out << "id\tmodality\tclass_id";
  for (int j = 0; j < m.shape.e; ++j) out << "\te" << j;
  out << '\n';
  auto set = embed_indices(m, data, kept);
  for (std::size_t i = 0; i < set.text.size(); ++i) {
    for (const auto* emb : {&set.text[i], &set.image[i]}) {
      out << emb->id << '\t' << (emb->modality == model::Modality::Text ? "text" : "image") << '\t'
          << data.class_of(kept[i]);
      for (Eigen::Index j = 0; j < emb->v.size(); ++j) out << '\t' << format_weight(emb->v(j));
      out << '\n';
    }
  }
}

}  // namespace recembed::eval
