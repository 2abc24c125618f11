#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace recembed::train {

struct TrainConfig {
  double lr0 = 1e-4;
  int halving_period = 20;  // epochs per halving of the learning rate
  int switches = 10;        // single-epoch modality alternations after the text stage
  int batch_size = 64;
  std::string objective = "cosine";  // "cosine" (margin + regularization) or "triplet"
  int patience = 3;                  // evaluations without improvement before a stage ends
  int max_stage_epochs = 50;         // cap for each adaptive stage (text-only, joint)
  int max_total_epochs = 200;
  std::uint64_t seed = 42;
  bool staircase_lr = false;  // halve in steps instead of continuously

  void validate() const {
    if (lr0 <= 0) throw std::invalid_argument("train.lr0 must be positive");
    if (halving_period <= 0) throw std::invalid_argument("train.halving_period must be positive");
    if (switches < 0) throw std::invalid_argument("train.switches must be non-negative");
    if (batch_size <= 0) throw std::invalid_argument("train.batch_size must be positive");
    if (objective != "cosine" && objective != "triplet")
      throw std::invalid_argument("train.objective must be 'cosine' or 'triplet'");
    if (patience <= 0) throw std::invalid_argument("train.patience must be positive");
    if (max_stage_epochs <= 0) throw std::invalid_argument("train.max_stage_epochs must be positive");
    if (max_total_epochs <= 0) throw std::invalid_argument("train.max_total_epochs must be positive");
  }
};

// lr0 * 0.5^(epoch/period), continuous exponent by default.
inline double lr_at(int epoch, const TrainConfig& cfg) {
  if (epoch < 0) throw std::invalid_argument("lr_at: epoch must be non-negative");
  const double exponent = cfg.staircase_lr ? double(epoch / cfg.halving_period)
                                           : double(epoch) / cfg.halving_period;
  return cfg.lr0 * std::pow(0.5, exponent);
}

}  // namespace recembed::train
