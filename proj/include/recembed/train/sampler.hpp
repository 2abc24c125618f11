#pragma once

#include <stdexcept>
#include <vector>

#include "recembed/core/rng.hpp"
#include "recembed/train/data.hpp"

namespace recembed::train {

// Index-level draws; embeddings are produced later by the trainer.
struct PairDraw {
  int query = 0;  // recipe whose text is encoded
  int image = 0;  // recipe whose image feature is encoded
  int y = 1;
};

struct TripletDraw {
  int query = 0;
  int d_pos = 0;
  int d_neg = 0;
  int sem_pos = 0;
  int sem_neg = 0;
};

// Alternating positive/negative pairs; negatives are uniform over the other
// training recipes.
inline std::vector<PairDraw> sample_pair_batch(const Dataset& data, int batch_size, Rng& rng) {
  if (data.train.size() < 2)
    throw std::invalid_argument("sample_pair_batch: need at least two training recipes");
  std::vector<PairDraw> batch;
  batch.reserve(std::size_t(batch_size));
  const int n = int(data.train.size());
  for (int b = 0; b < batch_size; ++b) {
    PairDraw draw;
    draw.query = data.train[std::size_t(rng.uniform_int(n))];
    if (b % 2 == 0) {
      draw.image = draw.query;
      draw.y = 1;
    } else {
      do {
        draw.image = data.train[std::size_t(rng.uniform_int(n))];
      } while (draw.image == draw.query);
      draw.y = -1;
    }
    batch.push_back(draw);
  }
  return batch;
}

inline void check_triplet_preconditions(const Dataset& data) {
  int populated = 0;
  for (const auto& members : data.train_by_class) {
    if (members.empty()) continue;
    ++populated;
    if (members.size() < 2)
      throw std::invalid_argument(
          "sample_triplet_batch: every training class needs at least two members");
  }
  if (populated < 2)
    throw std::invalid_argument("sample_triplet_batch: need at least two training classes");
}

inline std::vector<TripletDraw> sample_triplet_batch(const Dataset& data, int batch_size,
                                                     Rng& rng) {
  check_triplet_preconditions(data);
  std::vector<TripletDraw> batch;
  batch.reserve(std::size_t(batch_size));
  const int n = int(data.train.size());
  for (int b = 0; b < batch_size; ++b) {
    TripletDraw t;
    t.query = data.train[std::size_t(rng.uniform_int(n))];
    t.d_pos = t.query;
    do {
      t.d_neg = data.train[std::size_t(rng.uniform_int(n))];
    } while (t.d_neg == t.query);
    const auto& same = data.train_by_class[std::size_t(data.class_of(t.query))];
    do {
      t.sem_pos = same[std::size_t(rng.uniform_int(int(same.size())))];
    } while (t.sem_pos == t.query);
    do {
      t.sem_neg = data.train[std::size_t(rng.uniform_int(n))];
    } while (data.class_of(t.sem_neg) == data.class_of(t.query));
    batch.push_back(t);
  }
  return batch;
}

}  // namespace recembed::train
