#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "recembed/model/joint_embedding.hpp"

namespace recembed::eval {

using recembed::model::JointEmbedding;

// 1-based rank of the candidate whose id matches the query, ordering by
// descending similarity with ties broken by ascending candidate id.
// Embeddings are unit length (or zero when degenerate), so the dot product is
// the cosine similarity.
inline int rank_of_true_match(const JointEmbedding& query,
                              const std::vector<JointEmbedding>& candidates) {
  const JointEmbedding* truth = nullptr;
  for (const auto& c : candidates)
    if (c.id == query.id) {
      truth = &c;
      break;
    }
  if (!truth) throw std::invalid_argument("rank: true match absent from candidates");
  const double sim_true = query.v.dot(truth->v);
  int rank = 1;
  for (const auto& c : candidates) {
    if (c.id == query.id) continue;
    const double sim = query.v.dot(c.v);
    if (sim > sim_true || (sim == sim_true && c.id < truth->id)) ++rank;
  }
  return rank;
}

// Median with even-count midpoint averaging.
inline double median_rank(std::vector<int> ranks) {
  if (ranks.empty()) throw std::invalid_argument("median_rank: empty input");
  std::sort(ranks.begin(), ranks.end());
  const std::size_t n = ranks.size();
  if (n % 2 == 1) return double(ranks[n / 2]);
  return (double(ranks[n / 2 - 1]) + double(ranks[n / 2])) / 2.0;
}

inline double recall_at_k(const std::vector<int>& ranks, int k) {
  if (ranks.empty()) throw std::invalid_argument("recall_at_k: empty input");
  std::size_t hits = 0;
  for (int r : ranks)
    if (r <= k) ++hits;
  return double(hits) / double(ranks.size());
}

}  // namespace recembed::eval
