#include "recembed/config.hpp"

#include <fstream>
#include <set>

namespace recembed {

namespace {

using nlohmann::json;

// Strict section reader: every key must be consumed, so typos surface by name.
class Section {
 public:
  Section(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j.is_object()) throw std::invalid_argument("config: " + prefix_ + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: invalid value for key '" + prefix_ + key + "'");
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key))
        throw std::invalid_argument("config: unknown key '" + prefix_ + key + "'");
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> used_;
};

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  Section root(j, "");
  root.get("seed", cfg.seed);
  root.get("precision", cfg.precision);
  root.get("min_freq", cfg.min_freq);

  // Section seeds default to streams of the master seed.
  cfg.train.seed = derive_seed(cfg.seed, 101);
  cfg.eval.seed = derive_seed(cfg.seed, 102);
  cfg.word2vec.seed = derive_seed(cfg.seed, 103);

  json sub;
  root.get("shape", sub);
  if (!sub.is_null()) {
    Section s(sub, "shape.");
    s.get("p", cfg.shape.p);
    s.get("w", cfg.shape.w);
    s.get("h", cfg.shape.h);
    s.get("q", cfg.shape.q);
    s.get("n", cfg.shape.n);
    s.get("e", cfg.shape.e);
    s.get("heads", cfg.shape.heads);
    s.get("ffn_dim", cfg.shape.ffn_dim);
    s.get("layers", cfg.shape.layers);
    s.get("ia_widths", cfg.shape.ia_widths);
    s.finish();
  }

  sub = json();
  root.get("loss", sub);
  if (!sub.is_null()) {
    Section s(sub, "loss.");
    s.get("alpha_cos", cfg.loss.alpha_cos);
    s.get("lambda", cfg.loss.lambda);
    s.get("alpha_tri", cfg.loss.alpha_tri);
    s.get("beta", cfg.loss.beta);
    s.get("gamma", cfg.loss.gamma);
    s.get("num_classes", cfg.loss.num_classes);
    s.finish();
  }

  sub = json();
  root.get("train", sub);
  if (!sub.is_null()) {
    Section s(sub, "train.");
    s.get("lr0", cfg.train.lr0);
    s.get("halving_period", cfg.train.halving_period);
    s.get("switches", cfg.train.switches);
    s.get("batch_size", cfg.train.batch_size);
    s.get("objective", cfg.train.objective);
    s.get("patience", cfg.train.patience);
    s.get("max_stage_epochs", cfg.train.max_stage_epochs);
    s.get("max_total_epochs", cfg.train.max_total_epochs);
    s.get("seed", cfg.train.seed);
    s.get("staircase_lr", cfg.train.staircase_lr);
    s.finish();
  }

  sub = json();
  root.get("eval", sub);
  if (!sub.is_null()) {
    Section s(sub, "eval.");
    s.get("subset_count", cfg.eval.subset_count);
    s.get("subset_size", cfg.eval.subset_size);
    s.get("ks", cfg.eval.ks);
    s.get("seed", cfg.eval.seed);
    s.get("text_to_image", cfg.eval.text_to_image);
    s.finish();
  }

  sub = json();
  root.get("generator", sub);
  if (!sub.is_null()) {
    Section s(sub, "generator.");
    s.get("num_classes", cfg.generator.num_classes);
    s.get("recipes_per_class", cfg.generator.recipes_per_class);
    s.get("ingredient_pool_per_class", cfg.generator.ingredient_pool_per_class);
    s.get("min_ingredients", cfg.generator.min_ingredients);
    s.get("max_ingredients", cfg.generator.max_ingredients);
    s.get("min_instructions", cfg.generator.min_instructions);
    s.get("max_instructions", cfg.generator.max_instructions);
    s.get("feature_dim", cfg.generator.feature_dim);
    s.get("sigma", cfg.generator.sigma);
    s.get("train_frac", cfg.generator.train_frac);
    s.get("val_frac", cfg.generator.val_frac);
    s.finish();
  }

  sub = json();
  root.get("word2vec", sub);
  if (!sub.is_null()) {
    Section s(sub, "word2vec.");
    s.get("enabled", cfg.word2vec.enabled);
    s.get("epochs", cfg.word2vec.epochs);
    s.get("window", cfg.word2vec.window);
    s.get("negatives", cfg.word2vec.negatives);
    s.get("lr", cfg.word2vec.lr);
    s.get("seed", cfg.word2vec.seed);
    s.finish();
  }

  sub = json();
  root.get("paths", sub);
  if (!sub.is_null()) {
    Section s(sub, "paths.");
    s.get("corpus", cfg.paths.corpus);
    s.get("features", cfg.paths.features);
    s.get("split", cfg.paths.split);
    s.get("vocab", cfg.paths.vocab);
    s.get("tokenized", cfg.paths.tokenized);
    s.get("embedding_init", cfg.paths.embedding_init);
    s.get("checkpoint", cfg.paths.checkpoint);
    s.get("out_dir", cfg.paths.out_dir);
    s.finish();
  }
  root.finish();
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  return json{
      {"seed", seed},
      {"precision", precision},
      {"min_freq", min_freq},
      {"shape",
       {{"p", shape.p},
        {"w", shape.w},
        {"h", shape.h},
        {"q", shape.q},
        {"n", shape.n},
        {"e", shape.e},
        {"heads", shape.heads},
        {"ffn_dim", shape.ffn_dim},
        {"layers", shape.layers},
        {"ia_widths", shape.attention_widths()}}},
      {"loss",
       {{"alpha_cos", loss.alpha_cos},
        {"lambda", loss.lambda},
        {"alpha_tri", loss.alpha_tri},
        {"beta", loss.beta},
        {"gamma", loss.gamma},
        {"num_classes", loss.num_classes}}},
      {"train",
       {{"lr0", train.lr0},
        {"halving_period", train.halving_period},
        {"switches", train.switches},
        {"batch_size", train.batch_size},
        {"objective", train.objective},
        {"patience", train.patience},
        {"max_stage_epochs", train.max_stage_epochs},
        {"max_total_epochs", train.max_total_epochs},
        {"seed", train.seed},
        {"staircase_lr", train.staircase_lr}}},
      {"eval",
       {{"subset_count", eval.subset_count},
        {"subset_size", eval.subset_size},
        {"ks", eval.ks},
        {"seed", eval.seed},
        {"text_to_image", eval.text_to_image}}},
      {"generator",
       {{"num_classes", generator.num_classes},
        {"recipes_per_class", generator.recipes_per_class},
        {"ingredient_pool_per_class", generator.ingredient_pool_per_class},
        {"min_ingredients", generator.min_ingredients},
        {"max_ingredients", generator.max_ingredients},
        {"min_instructions", generator.min_instructions},
        {"max_instructions", generator.max_instructions},
        {"feature_dim", generator.feature_dim},
        {"sigma", generator.sigma},
        {"train_frac", generator.train_frac},
        {"val_frac", generator.val_frac}}},
      {"word2vec",
       {{"enabled", word2vec.enabled},
        {"epochs", word2vec.epochs},
        {"window", word2vec.window},
        {"negatives", word2vec.negatives},
        {"lr", word2vec.lr},
        {"seed", word2vec.seed}}},
      {"paths",
       {{"corpus", paths.corpus},
        {"features", paths.features},
        {"split", paths.split},
        {"vocab", paths.vocab},
        {"tokenized", paths.tokenized},
        {"embedding_init", paths.embedding_init},
        {"checkpoint", paths.checkpoint},
        {"out_dir", paths.out_dir}}}};
}

void RunConfig::validate() const {
  shape.validate();
  loss.validate();
  train.validate();
  eval.validate();
  if (precision != "f32" && precision != "f64")
    throw std::invalid_argument("config: precision must be 'f32' or 'f64'");
  if (min_freq < 1) throw std::invalid_argument("config: min_freq must be at least 1");
}

}  // namespace recembed
