#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "recembed/eval/evaluate.hpp"
#include "recembed/model/image_head.hpp"
#include "recembed/model/text_encoder.hpp"
#include "recembed/objectives/losses.hpp"
#include "recembed/train/adam.hpp"
#include "recembed/train/sampler.hpp"
#include "recembed/train/schedule.hpp"

namespace recembed::train {

struct EpochRecord {
  int epoch = 0;
  std::string stage;
  double lr = 0;
  double loss = 0;
  double val_medr = 0;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  bool aborted = false;
  std::string abort_reason;
  int best_epoch = -1;
  double best_val_medr = std::numeric_limits<double>::infinity();
  int alternations = 0;
};

template <typename S>
struct TrainHooks {
  // Called after each epoch's record is final.
  std::function<void(const EpochRecord&, model::Model<S>&)> on_epoch;
  // Called when a stage is entered (entering=true) and left (false).
  std::function<void(const std::string& stage, bool entering, model::Model<S>&)> on_stage;
};

// Which parameter groups a stage updates. The classifier belongs to the
// objective, not to a modality branch, so it trains in every stage.
inline bool group_active(model::ParamGroup g, const std::string& stage) {
  using model::ParamGroup;
  if (g == ParamGroup::Objective) return true;
  if (stage == "joint") return true;
  if (stage == "text_only" || stage == "alt_text") return g == ParamGroup::Text;
  return g == ParamGroup::Image;  // alt_image
}

// Mean loss over one sampled batch, as a graph rooted at a 1x1 node.
template <typename S>
ad::Var<S> batch_loss(model::Model<S>& m, const Dataset& data, const TrainConfig& tcfg,
                      const objectives::LossConfig& lcfg, Rng& rng) {
  std::vector<ad::Var<S>> losses;
  if (tcfg.objective == "cosine") {
    for (const auto& draw : sample_pair_batch(data, tcfg.batch_size, rng)) {
      auto text = model::encode_recipe(data.recipes[std::size_t(draw.query)], m).embedding;
      auto image = model::encode_image(data.feature_of(draw.image), m.img);
      losses.push_back(objectives::regularized_loss(text, image, draw.y, data.class_of(draw.query),
                                                    data.class_of(draw.image), m.clf, lcfg));
    }
  } else {
    for (const auto& draw : sample_triplet_batch(data, tcfg.batch_size, rng)) {
      auto text = model::encode_recipe(data.recipes[std::size_t(draw.query)], m).embedding;
      auto d_pos = model::encode_image(data.feature_of(draw.d_pos), m.img);
      auto d_neg = model::encode_image(data.feature_of(draw.d_neg), m.img);
      auto s_pos = model::encode_image(data.feature_of(draw.sem_pos), m.img);
      auto s_neg = model::encode_image(data.feature_of(draw.sem_neg), m.img);
      losses.push_back(objectives::triplet_loss(text, d_pos, d_neg, s_pos, s_neg, lcfg));
    }
  }
  return ad::scale(ad::add_n(losses), 1.0 / double(losses.size()));
}

namespace detail {

template <typename S>
std::vector<ad::Mat<S>> snapshot(std::vector<model::NamedParam<S>>& params) {
  std::vector<ad::Mat<S>> out;
  out.reserve(params.size());
  for (auto& p : params) out.push_back(p.var.value());
  return out;
}

template <typename S>
void restore(std::vector<model::NamedParam<S>>& params, const std::vector<ad::Mat<S>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i].var.value() = values[i];
}

}  // namespace detail

// Staged optimization: text branch first until validation MedR stalls, then
// `switches` single-epoch modality alternations starting with the image head,
// then joint fine-tuning with everything released.
template <typename S>
TrainResult train(model::Model<S>& m, const Dataset& data, const TrainConfig& tcfg,
                  const objectives::LossConfig& lcfg, const TrainHooks<S>& hooks = {}) {
  tcfg.validate();
  lcfg.validate();
  if (data.train.empty()) throw std::invalid_argument("train: empty training split");
  if (tcfg.objective == "triplet") check_triplet_preconditions(data);

  auto params = m.params();
  AdamState<S> adam;
  TrainResult result;
  std::vector<ad::Mat<S>> best = detail::snapshot(params);

  // Early stopping tracks the validation pool; with no validation split the
  // training pool stands in.
  const std::vector<int>& eval_pool = data.validation.empty() ? data.train : data.validation;

  int epoch = 0;
  bool out_of_budget = false;

  auto run_epoch = [&](const std::string& stage) {
    const double lr = lr_at(epoch, tcfg);
    Rng rng(derive_seed(tcfg.seed, 0xba7c4000u + std::uint64_t(epoch)));
    const int batches = std::max(1, int(data.train.size()) / tcfg.batch_size);
    double loss_sum = 0;
    std::vector<model::NamedParam<S>> active;
    for (auto& p : params)
      if (group_active(p.group, stage)) active.push_back(p);
    for (int b = 0; b < batches; ++b) {
      auto loss = batch_loss(m, data, tcfg, lcfg, rng);
      const double value = double(loss.value()(0, 0));
      if (!std::isfinite(value)) {
        result.aborted = true;
        result.abort_reason = "non-finite loss at epoch " + std::to_string(epoch);
        return false;
      }
      loss_sum += value;
      ad::backward(loss);
      try {
        adam_step(active, adam, lr);
      } catch (const NonFiniteGradient& e) {
        result.aborted = true;
        result.abort_reason = e.what();
        return false;
      }
      for (auto& p : params) p.var.zero_grad();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.stage = stage;
    rec.lr = lr;
    rec.loss = loss_sum / batches;
    rec.val_medr = eval::pool_median_rank(eval::embed_indices(m, data, eval_pool));
    result.log.push_back(rec);
    if (rec.val_medr < result.best_val_medr) {
      result.best_val_medr = rec.val_medr;
      result.best_epoch = epoch;
      best = detail::snapshot(params);
    }
    if (hooks.on_epoch) hooks.on_epoch(rec, m);
    ++epoch;
    if (epoch >= tcfg.max_total_epochs) out_of_budget = true;
    return true;
  };

  auto run_adaptive_stage = [&](const std::string& stage) {
    if (hooks.on_stage) hooks.on_stage(stage, true, m);
    double stage_best = std::numeric_limits<double>::infinity();
    int stalls = 0;
    for (int i = 0; i < tcfg.max_stage_epochs && !out_of_budget; ++i) {
      if (!run_epoch(stage)) break;
      const double medr = result.log.back().val_medr;
      if (medr < stage_best) {
        stage_best = medr;
        stalls = 0;
      } else if (++stalls >= tcfg.patience) {
        break;
      }
    }
    if (hooks.on_stage) hooks.on_stage(stage, false, m);
  };

  run_adaptive_stage("text_only");

  for (int s = 0; s < tcfg.switches && !result.aborted && !out_of_budget; ++s) {
    const std::string stage = s % 2 == 0 ? "alt_image" : "alt_text";
    if (hooks.on_stage) hooks.on_stage(stage, true, m);
    if (run_epoch(stage)) ++result.alternations;
    if (hooks.on_stage) hooks.on_stage(stage, false, m);
  }

  if (!result.aborted && !out_of_budget) run_adaptive_stage("joint");

  detail::restore(params, best);  // hand back the best validation checkpoint
  return result;
}

}  // namespace recembed::train
