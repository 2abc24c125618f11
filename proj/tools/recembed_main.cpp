#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "recembed/config.hpp"
#include "recembed/corpus/io.hpp"
#include "recembed/corpus/synthetic.hpp"
#include "recembed/corpus/tokenize.hpp"
#include "recembed/embed/word2vec.hpp"
#include "recembed/eval/exporters.hpp"
#include "recembed/io/checkpoint.hpp"
#include "recembed/train/gradcheck.hpp"
#include "recembed/train/trainer.hpp"

namespace fs = std::filesystem;
using namespace recembed;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> precision;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--precision", flags.precision, "f32 or f64")
      ->check(CLI::IsMember({"f32", "f64"}));
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg =
      flags.config_path.empty() ? RunConfig{} : RunConfig::from_file(flags.config_path);
  if (flags.seed) {
    cfg.seed = *flags.seed;
    cfg.train.seed = derive_seed(cfg.seed, 101);
    cfg.eval.seed = derive_seed(cfg.seed, 102);
    cfg.word2vec.seed = derive_seed(cfg.seed, 103);
  }
  if (flags.precision) cfg.precision = *flags.precision;
  cfg.validate();
  return cfg;
}

template <typename F>
int with_precision(const std::string& precision, F&& f) {
  if (precision == "f32") return f(float{});
  return f(double{});
}

fs::path require_path(const std::string& value, const char* key) {
  if (value.empty())
    throw std::runtime_error(std::string("missing required path: '") + key + "'");
  return value;
}

train::Dataset load_dataset(const RunConfig& cfg) {
  auto tokenized = corpus::load_tokenized(require_path(cfg.paths.tokenized, "paths.tokenized"));
  auto features = corpus::load_feature_store(require_path(cfg.paths.features, "paths.features"));
  auto split = corpus::load_split(require_path(cfg.paths.split, "paths.split"));
  return train::build_dataset(std::move(tokenized), std::move(features), split);
}

int resolve_num_classes(const RunConfig& cfg, const train::Dataset& data) {
  if (cfg.loss.num_classes > 0) {
    if (cfg.loss.num_classes < data.num_classes)
      throw std::runtime_error("loss.num_classes is smaller than the corpus class count");
    return cfg.loss.num_classes;
  }
  return data.num_classes;
}

int cmd_generate(const CommonFlags& flags, const std::string& out_dir, bool force) {
  RunConfig cfg = resolve_config(flags);
  cfg.generator.validate();
  const fs::path out(out_dir);
  if (fs::exists(out) && !fs::is_empty(out) && !force)
    throw std::runtime_error("output directory " + out.string() +
                             " is not empty (use --force to overwrite)");
  fs::create_directories(out);

  auto corpus = corpus::generate_synthetic_corpus(cfg.generator, cfg.seed);
  auto split = corpus::stratified_split(corpus.recipes, cfg.generator.train_frac,
                                        cfg.generator.val_frac, cfg.seed);
  corpus::save_corpus(out / "corpus.jsonl", corpus.recipes);
  corpus::save_feature_store(out / "features.txt", corpus.features);
  corpus::save_split(out / "split.json", split);
  std::ofstream echo(out / "run_config.json");
  echo << cfg.to_json().dump(2) << '\n';
  std::cout << "generated " << corpus.recipes.size() << " recipes ("
            << cfg.generator.num_classes << " classes) into " << out.string() << '\n';
  return 0;
}

int cmd_preprocess(const CommonFlags& flags, const std::string& out_dir) {
  RunConfig cfg = resolve_config(flags);
  const fs::path out(out_dir.empty() ? cfg.paths.out_dir : out_dir);
  if (out.empty()) throw std::runtime_error("missing required path: '--out'");
  fs::create_directories(out);

  auto loaded = corpus::load_corpus(require_path(cfg.paths.corpus, "paths.corpus"));
  for (const auto& err : loaded.errors)
    std::cerr << "corpus line " << err.line << " (" << err.field << "): " << err.message << '\n';

  // Vocabulary from the training split when one is given, otherwise from the
  // whole corpus.
  std::vector<const corpus::Recipe*> vocab_source;
  if (!cfg.paths.split.empty()) {
    auto split = corpus::load_split(cfg.paths.split);
    std::unordered_map<std::string, const corpus::Recipe*> by_id;
    for (const auto& r : loaded.recipes) by_id[r.id] = &r;
    for (const auto& id : split.train) {
      auto it = by_id.find(id);
      if (it != by_id.end()) vocab_source.push_back(it->second);
    }
  } else {
    for (const auto& r : loaded.recipes) vocab_source.push_back(&r);
  }

  std::vector<std::vector<std::string>> sequences;
  for (const auto* r : vocab_source) {
    auto cleaned = corpus::filter_noisy_instructions(*r);
    if (!cleaned) continue;
    for (const auto& line : cleaned->ingredients) sequences.push_back(corpus::tokenize(line));
    for (const auto& s : cleaned->instructions) sequences.push_back(corpus::tokenize(s));
  }
  auto vocab = corpus::build_vocabulary(sequences, cfg.min_freq);
  corpus::save_vocabulary(out / "vocab.tsv", vocab);

  std::vector<corpus::TokenizedRecipe> tokenized;
  int rejected = 0;
  for (const auto& r : loaded.recipes) {
    std::string why;
    auto enc = corpus::encode_tokens(r, vocab, cfg.shape.p, &why);
    if (!enc) {
      ++rejected;
      std::cerr << "rejected recipe " << r.id << ": " << why << '\n';
      continue;
    }
    tokenized.push_back(std::move(*enc));
  }
  corpus::save_tokenized(out / "tokenized.jsonl", tokenized);

  if (cfg.word2vec.enabled) {
    std::vector<std::vector<int>> id_seqs;
    for (const auto& t : tokenized) {
      id_seqs.push_back(t.flat_ingredient_tokens());
      id_seqs.push_back(t.instruction_tokens);
    }
    auto table = embed::pretrain_word_embeddings(id_seqs, vocab.size(), cfg.shape.w, cfg.word2vec);
    io::save_matrix(out / "embedding_init.bin", table);
  }

  std::cout << "vocabulary " << vocab.size() << " entries; " << tokenized.size()
            << " recipes tokenized, " << rejected << " rejected, " << loaded.errors.size()
            << " malformed lines\n";
  return 0;
}

template <typename S>
int run_train(RunConfig cfg, const std::string& out_dir) {
  const fs::path out(out_dir.empty() ? cfg.paths.out_dir : out_dir);
  if (out.empty()) throw std::runtime_error("missing required path: '--out'");
  fs::create_directories(out);

  auto data = load_dataset(cfg);
  auto vocab = corpus::load_vocabulary(require_path(cfg.paths.vocab, "paths.vocab"));
  cfg.loss.num_classes = resolve_num_classes(cfg, data);

  auto m = model::init_model<S>(cfg.shape, vocab.size(), data.features.dim, cfg.loss.num_classes,
                                cfg.seed);
  if (!cfg.paths.embedding_init.empty()) {
    Eigen::MatrixXd table = io::load_matrix(cfg.paths.embedding_init);
    if (table.rows() != vocab.size() || table.cols() != cfg.shape.w)
      throw std::runtime_error("embedding_init shape does not match vocabulary x w");
    m.emb.table.value() = table.cast<S>();
    m.emb.table.value().row(0).setZero();
  }

  std::ofstream log(out / "train_log.jsonl");
  train::TrainHooks<S> hooks;
  hooks.on_epoch = [&log](const train::EpochRecord& rec, model::Model<S>&) {
    log << nlohmann::json{{"epoch", rec.epoch},
                          {"stage", rec.stage},
                          {"lr", rec.lr},
                          {"loss", rec.loss},
                          {"val_medr", rec.val_medr}}
               .dump()
        << '\n';
    log.flush();
  };

  auto result = train::train(m, data, cfg.train, cfg.loss, hooks);
  io::save_checkpoint(out / "checkpoint.bin", m, cfg.to_json());

  std::cout << "trained " << result.log.size() << " epochs, " << result.alternations
            << " alternations; best val MedR " << result.best_val_medr << " at epoch "
            << result.best_epoch << "; checkpoint " << (out / "checkpoint.bin").string() << '\n';
  if (result.aborted) {
    std::cerr << "training aborted: " << result.abort_reason
              << " (best checkpoint retained)\n";
    return 1;
  }
  return 0;
}

template <typename S>
int run_eval(RunConfig cfg, const std::string& checkpoint, const std::string& out_file) {
  auto data = load_dataset(cfg);
  auto vocab = corpus::load_vocabulary(require_path(cfg.paths.vocab, "paths.vocab"));
  cfg.loss.num_classes = resolve_num_classes(cfg, data);
  auto m = model::init_model<S>(cfg.shape, vocab.size(), data.features.dim, cfg.loss.num_classes,
                                cfg.seed);
  io::load_checkpoint(require_path(checkpoint, "--checkpoint"), m);

  auto report = eval::evaluate(m, data, data.test, cfg.eval);
  report.config_echo["run"] = cfg.to_json();
  const auto j = report.to_json();
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    out << j.dump(2) << '\n';
  }
  std::cout << "MedR " << report.mean_medr << " +/- " << report.stddev_medr;
  for (std::size_t i = 0; i < report.ks.size(); ++i)
    std::cout << "  R@" << report.ks[i] << " " << report.mean_recalls[i];
  std::cout << '\n';
  return 0;
}

template <typename S>
int run_export_attention(RunConfig cfg, const std::string& checkpoint,
                         const std::string& recipe_id, const std::string& out_file) {
  auto data = load_dataset(cfg);
  auto vocab = corpus::load_vocabulary(require_path(cfg.paths.vocab, "paths.vocab"));
  cfg.loss.num_classes = resolve_num_classes(cfg, data);
  auto m = model::init_model<S>(cfg.shape, vocab.size(), data.features.dim, cfg.loss.num_classes,
                                cfg.seed);
  io::load_checkpoint(require_path(checkpoint, "--checkpoint"), m);

  const corpus::TokenizedRecipe* recipe = nullptr;
  for (const auto& r : data.recipes)
    if (r.id == recipe_id) recipe = &r;
  if (!recipe) throw std::runtime_error("recipe id not found: " + recipe_id);

  auto dump = eval::export_attention(m, *recipe, vocab);
  if (out_file.empty()) {
    eval::write_attention_tsv(std::cout, dump);
  } else {
    std::ofstream out(out_file);
    eval::write_attention_tsv(out, dump);
    std::cout << "attention dump for " << recipe_id << " -> " << out_file << '\n';
  }
  return 0;
}

template <typename S>
int run_export_embeddings(RunConfig cfg, const std::string& checkpoint, const std::string& which,
                          const std::string& out_file, int top_classes) {
  auto data = load_dataset(cfg);
  auto vocab = corpus::load_vocabulary(require_path(cfg.paths.vocab, "paths.vocab"));
  cfg.loss.num_classes = resolve_num_classes(cfg, data);
  auto m = model::init_model<S>(cfg.shape, vocab.size(), data.features.dim, cfg.loss.num_classes,
                                cfg.seed);
  io::load_checkpoint(require_path(checkpoint, "--checkpoint"), m);

  const std::vector<int>* indices = nullptr;
  if (which == "train")
    indices = &data.train;
  else if (which == "validation")
    indices = &data.validation;
  else if (which == "test")
    indices = &data.test;
  else
    throw std::runtime_error("--split must be train, validation or test");

  if (out_file.empty()) {
    eval::export_embeddings(m, data, *indices, std::cout, top_classes);
  } else {
    std::ofstream out(out_file);
    eval::export_embeddings(m, data, *indices, out, top_classes);
    std::cout << "embeddings (" << which << ") -> " << out_file << '\n';
  }
  return 0;
}

// Gradient verification runs on a small self-contained fixture; without a
// config it uses desk-scale shapes rather than the full-size defaults.
int cmd_gradcheck(const CommonFlags& flags, double tolerance, int probes) {
  RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = resolve_config(flags);
  } else {
    cfg.shape.p = 16;
    cfg.shape.w = 32;
    cfg.shape.h = 16;
    cfg.shape.q = 24;
    cfg.shape.n = 2;
    cfg.shape.e = 32;
    cfg.shape.heads = 4;
    cfg.shape.ffn_dim = 64;
    cfg.shape.layers = 2;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.precision) cfg.precision = *flags.precision;
  }
  if (cfg.precision != "f64")
    throw std::runtime_error("gradcheck requires precision 'f64'");

  corpus::GeneratorSpec gen;
  gen.num_classes = 4;
  gen.recipes_per_class = 6;
  gen.ingredient_pool_per_class = 6;
  gen.feature_dim = 12;
  gen.sigma = 0.05;
  auto synth = corpus::generate_synthetic_corpus(gen, cfg.seed);
  auto split = corpus::stratified_split(synth.recipes, 0.7, 0.15, cfg.seed);

  std::vector<std::vector<std::string>> sequences;
  for (const auto& r : synth.recipes) {
    for (const auto& line : r.ingredients) sequences.push_back(corpus::tokenize(line));
    for (const auto& s : r.instructions) sequences.push_back(corpus::tokenize(s));
  }
  auto vocab = corpus::build_vocabulary(sequences, 1);
  std::vector<corpus::TokenizedRecipe> tokenized;
  for (const auto& r : synth.recipes) {
    auto enc = corpus::encode_tokens(r, vocab, cfg.shape.p);
    if (enc) tokenized.push_back(std::move(*enc));
  }
  auto data = train::build_dataset(std::move(tokenized), std::move(synth.features), split);

  auto m = model::init_model<double>(cfg.shape, vocab.size(), gen.feature_dim, data.num_classes,
                                     cfg.seed);
  objectives::LossConfig lcfg = cfg.loss;
  lcfg.num_classes = data.num_classes;

  bool all_pass = true;
  for (const std::string objective : {"cosine", "triplet"}) {
    train::TrainConfig tcfg = cfg.train;
    tcfg.objective = objective;
    tcfg.batch_size = 4;
    Rng rng(derive_seed(cfg.seed, 0x9c0de));
    auto builder = [&m, &data, tcfg, lcfg, seed = rng.next_u64()]() {
      Rng batch_rng(seed);
      return train::batch_loss(m, data, tcfg, lcfg, batch_rng);
    };
    auto report = train::check_gradients(m.params(), builder, probes, cfg.seed);
    const bool pass = report.pass(tolerance);
    all_pass = all_pass && pass;
    std::cout << "gradcheck[" << objective << "] " << (pass ? "PASS" : "FAIL")
              << " max rel err " << report.max_rel_err << " (worst: " << report.worst << ")\n";
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-modal recipe retrieval: training, evaluation and exports"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string out_dir, out_file, checkpoint, recipe_id, split_name = "test";
  bool force = false;
  int top_classes = 0;
  double tolerance = 1e-5;
  int probes = 4;

  auto* generate = app.add_subcommand("generate", "write a synthetic corpus");
  add_common(generate, flags);
  generate->add_option("--out", out_dir, "output directory")->required();
  generate->add_flag("--force", force, "overwrite a non-empty output directory");

  auto* preprocess = app.add_subcommand("preprocess", "tokenize a corpus and build a vocabulary");
  add_common(preprocess, flags);
  preprocess->add_option("--out", out_dir, "output directory");

  auto* train_cmd = app.add_subcommand("train", "run the staged training schedule");
  add_common(train_cmd, flags);
  train_cmd->add_option("--out", out_dir, "output directory");

  auto* eval_cmd = app.add_subcommand("eval", "retrieval metrics on the test split");
  add_common(eval_cmd, flags);
  eval_cmd->add_option("--checkpoint", checkpoint, "model checkpoint");
  eval_cmd->add_option("--out", out_file, "report JSON path");

  auto* attn = app.add_subcommand("export-attention", "dump ingredient-attention weights");
  add_common(attn, flags);
  attn->add_option("--checkpoint", checkpoint, "model checkpoint");
  attn->add_option("--recipe-id", recipe_id, "recipe to encode")->required();
  attn->add_option("--out", out_file, "TSV output path (stdout when omitted)");

  auto* embs = app.add_subcommand("export-embeddings", "dump joint embeddings as TSV");
  add_common(embs, flags);
  embs->add_option("--checkpoint", checkpoint, "model checkpoint");
  embs->add_option("--split", split_name, "train, validation or test");
  embs->add_option("--out", out_file, "TSV output path (stdout when omitted)");
  embs->add_option("--top-classes", top_classes, "keep only the K most common classes");

  auto* gradcheck = app.add_subcommand("gradcheck", "verify gradients against finite differences");
  add_common(gradcheck, flags);
  gradcheck->add_option("--tolerance", tolerance, "maximum relative error");
  gradcheck->add_option("--probes", probes, "coordinates probed per tensor");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(flags, out_dir, force);
    if (preprocess->parsed()) return cmd_preprocess(flags, out_dir);
    if (train_cmd->parsed()) {
      RunConfig cfg = resolve_config(flags);
      return with_precision(cfg.precision, [&](auto tag) {
        return run_train<decltype(tag)>(cfg, out_dir);
      });
    }
    if (eval_cmd->parsed()) {
      RunConfig cfg = resolve_config(flags);
      return with_precision(cfg.precision, [&](auto tag) {
        return run_eval<decltype(tag)>(cfg, checkpoint, out_file);
      });
    }
    if (attn->parsed()) {
      RunConfig cfg = resolve_config(flags);
      return with_precision(cfg.precision, [&](auto tag) {
        return run_export_attention<decltype(tag)>(cfg, checkpoint, recipe_id, out_file);
      });
    }
    if (embs->parsed()) {
      RunConfig cfg = resolve_config(flags);
      return with_precision(cfg.precision, [&](auto tag) {
        return run_export_embeddings<decltype(tag)>(cfg, checkpoint, split_name, out_file,
                                                    top_classes);
      });
    }
    if (gradcheck->parsed()) return cmd_gradcheck(flags, tolerance, probes);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
