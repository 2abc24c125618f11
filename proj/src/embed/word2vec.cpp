#include "recembed/embed/word2vec.hpp"

#include <cmath>
#include <stdexcept>

#include "recembed/core/rng.hpp"

namespace recembed::embed {

Eigen::MatrixXd random_embedding_table(int vocab_size, int dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x737461ULL));
  Eigen::MatrixXd table(vocab_size, dim);
  const double scale = 0.5 / dim;
  for (int i = 0; i < vocab_size; ++i)
    for (int j = 0; j < dim; ++j) table(i, j) = rng.uniform(-scale, scale);
  table.row(0).setZero();
  return table;
}

Eigen::MatrixXd pretrain_word_embeddings(const std::vector<std::vector<int>>& sequences,
                                         int vocab_size, int dim, const SkipGramConfig& cfg) {
  bool any = false;
  for (const auto& s : sequences)
    if (!s.empty()) any = true;
  if (!any) throw std::invalid_argument("pretrain_word_embeddings: empty corpus");

  // Unigram^(3/4) negative-sampling table.
  std::vector<double> counts(std::size_t(vocab_size), 0.0);
  for (const auto& s : sequences)
    for (int t : s) {
      if (t < 0 || t >= vocab_size)
        throw std::invalid_argument("pretrain_word_embeddings: token id out of range");
      counts[std::size_t(t)] += 1.0;
    }
  std::vector<double> cdf(counts.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 1; i < counts.size(); ++i) {  // never sample padding
    total += std::pow(counts[i], 0.75);
    cdf[i] = total;
  }
  if (total <= 0) throw std::invalid_argument("pretrain_word_embeddings: empty corpus");

  Rng rng(derive_seed(cfg.seed, 0x773276ULL));
  auto sample_negative = [&]() {
    const double u = rng.next_double() * total;
    return int(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };

  Eigen::MatrixXd in = random_embedding_table(vocab_size, dim, cfg.seed);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(vocab_size, dim);

  auto sgd_pair = [&](int center, int context, double label) {
    const double score = in.row(center).dot(out.row(context));
    const double sig = 1.0 / (1.0 + std::exp(-score));
    const double g = cfg.lr * (label - sig);
    const Eigen::RowVectorXd din = g * out.row(context);
    out.row(context) += g * in.row(center);
    in.row(center) += din;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& seq : sequences) {
      const int len = int(seq.size());
      for (int i = 0; i < len; ++i) {
        if (seq[std::size_t(i)] == 0) continue;
        const int reach = 1 + rng.uniform_int(cfg.window);
        for (int j = std::max(0, i - reach); j <= std::min(len - 1, i + reach); ++j) {
          if (j == i || seq[std::size_t(j)] == 0) continue;
          sgd_pair(seq[std::size_t(i)], seq[std::size_t(j)], 1.0);
          for (int k = 0; k < cfg.negatives; ++k) sgd_pair(seq[std::size_t(i)], sample_negative(), 0.0);
        }
      }
    }
  }
  in.row(0).setZero();
  return in;
}

}  // namespace recembed::embed
