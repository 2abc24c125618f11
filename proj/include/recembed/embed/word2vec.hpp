#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace recembed::embed {

struct SkipGramConfig {
  bool enabled = false;
  int epochs = 5;
  int window = 3;
  int negatives = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;
};

// Scaled uniform init; the padding row is zero. Used directly when
// pretraining is disabled.
Eigen::MatrixXd random_embedding_table(int vocab_size, int dim, std::uint64_t seed);

// Skip-gram with negative sampling over integer token sequences. Row 0
// (padding) stays zero; the result is meant to be fine-tuned later.
Eigen::MatrixXd pretrain_word_embeddings(const std::vector<std::vector<int>>& sequences,
                                         int vocab_size, int dim, const SkipGramConfig& cfg);

}  // namespace recembed::embed
