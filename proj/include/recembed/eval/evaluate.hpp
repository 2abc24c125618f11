#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "recembed/core/rng.hpp"
#include "recembed/eval/metrics.hpp"
#include "recembed/model/image_head.hpp"
#include "recembed/model/text_encoder.hpp"
#include "recembed/train/data.hpp"

namespace recembed::eval {

struct EvalConfig {
  int subset_count = 10;
  int subset_size = 1000;
  std::vector<int> ks = {1, 5, 10};
  std::uint64_t seed = 7;
  bool text_to_image = false;  // symmetric direction; image-to-recipe is the reported one

  void validate() const {
    if (subset_count <= 0) throw std::invalid_argument("eval.subset_count must be positive");
    if (subset_size <= 0) throw std::invalid_argument("eval.subset_size must be positive");
    if (ks.empty()) throw std::invalid_argument("eval.ks must be non-empty");
    for (int k : ks)
      if (k <= 0 || k >= subset_size)
        throw std::invalid_argument("eval.ks entries must lie in [1, subset_size)");
  }
};

// Uniform sampling without replacement inside each subset; subsets are drawn
// independently of each other.
inline std::vector<std::vector<std::string>> build_subsets(const std::vector<std::string>& pool,
                                                           const EvalConfig& cfg) {
  cfg.validate();
  if (int(pool.size()) < cfg.subset_size)
    throw std::invalid_argument("build_subsets: subset size exceeds candidate pool");
  std::vector<std::vector<std::string>> subsets;
  for (int s = 0; s < cfg.subset_count; ++s) {
    Rng rng(derive_seed(cfg.seed, 0xe7a1000u + std::uint64_t(s)));
    std::vector<std::string> shuffled = pool;
    rng.shuffle(shuffled.begin(), shuffled.end());
    shuffled.resize(std::size_t(cfg.subset_size));
    subsets.push_back(std::move(shuffled));
  }
  return subsets;
}

struct RetrievalReport {
  std::vector<double> per_subset_medr;
  double mean_medr = 0;
  double stddev_medr = 0;  // sample standard deviation across subsets
  std::vector<int> ks;
  std::vector<double> mean_recalls;
  nlohmann::json config_echo;

  nlohmann::json to_json() const {
    return nlohmann::json{{"per_subset_medr", per_subset_medr},
                          {"mean_medr", mean_medr},
                          {"stddev_medr", stddev_medr},
                          {"ks", ks},
                          {"mean_recalls", mean_recalls},
                          {"config", config_echo}};
  }
};

// Text and image embeddings of the same recipes, aligned by index.
struct EmbeddingSet {
  std::vector<JointEmbedding> text;
  std::vector<JointEmbedding> image;
};

// Rank every image query of each subset against the subset's text embeddings
// (or the reverse when cfg.text_to_image) and aggregate MedR and recalls.
inline RetrievalReport evaluate_embeddings(const EmbeddingSet& set, const EvalConfig& cfg) {
  cfg.validate();
  if (set.text.size() != set.image.size())
    throw std::invalid_argument("evaluate_embeddings: modality counts differ");

  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < set.text.size(); ++i) {
    if (set.text[i].id != set.image[i].id)
      throw std::invalid_argument("evaluate_embeddings: modality ids misaligned");
    ids.push_back(set.text[i].id);
    by_id.emplace(set.text[i].id, i);
  }

  const auto& queries = cfg.text_to_image ? set.text : set.image;
  const auto& cands = cfg.text_to_image ? set.image : set.text;

  RetrievalReport report;
  report.ks = cfg.ks;
  report.mean_recalls.assign(cfg.ks.size(), 0.0);

  const auto subsets = build_subsets(ids, cfg);
  for (const auto& subset : subsets) {
    std::vector<JointEmbedding> candidates;
    candidates.reserve(subset.size());
    for (const auto& id : subset) candidates.push_back(cands[by_id.at(id)]);
    std::vector<int> ranks;
    ranks.reserve(subset.size());
    for (const auto& id : subset)
      ranks.push_back(rank_of_true_match(queries[by_id.at(id)], candidates));
    report.per_subset_medr.push_back(median_rank(ranks));
    for (std::size_t i = 0; i < cfg.ks.size(); ++i)
      report.mean_recalls[i] += recall_at_k(ranks, cfg.ks[i]);
  }

  const double n = double(report.per_subset_medr.size());
  for (double m : report.per_subset_medr) report.mean_medr += m;
  report.mean_medr /= n;
  if (n > 1) {
    double ss = 0;
    for (double m : report.per_subset_medr) ss += (m - report.mean_medr) * (m - report.mean_medr);
    report.stddev_medr = std::sqrt(ss / (n - 1));
  }
  for (auto& r : report.mean_recalls) r /= n;

  report.config_echo = nlohmann::json{{"subset_count", cfg.subset_count},
                                      {"subset_size", cfg.subset_size},
                                      {"ks", cfg.ks},
                                      {"seed", cfg.seed},
                                      {"text_to_image", cfg.text_to_image}};
  return report;
}

template <typename S>
EmbeddingSet embed_indices(model::Model<S>& m, const train::Dataset& data,
                           const std::vector<int>& indices) {
  EmbeddingSet set;
  for (int idx : indices) {
    const auto& r = data.recipes[std::size_t(idx)];
    auto enc = model::encode_recipe(r, m);
    JointEmbedding text{r.id, model::Modality::Text, enc.embedding.value().row(0).transpose().template cast<double>(), enc.degenerate};
    bool img_degenerate = false;
    auto img = model::encode_image(data.feature_of(idx), m.img, &img_degenerate);
    JointEmbedding image{r.id, model::Modality::Image, img.value().row(0).transpose().template cast<double>(), img_degenerate};
    set.text.push_back(std::move(text));
    set.image.push_back(std::move(image));
  }
  return set;
}

template <typename S>
RetrievalReport evaluate(model::Model<S>& m, const train::Dataset& data,
                         const std::vector<int>& indices, const EvalConfig& cfg) {
  return evaluate_embeddings(embed_indices(m, data, indices), cfg);
}

// Validation MedR over one pool: every image ranks against all text
// embeddings of the pool. Used for early stopping.
inline double pool_median_rank(const EmbeddingSet& set) {
  std::vector<int> ranks;
  ranks.reserve(set.image.size());
  for (const auto& q : set.image) ranks.push_back(rank_of_true_match(q, set.text));
  return median_rank(ranks);
}

}  // namespace recembed::eval
