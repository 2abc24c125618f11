#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(RECEMBED_BIN) + " " + args + " 2>&1";
  std::array<char, 512> buf{};
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), int(buf.size()), pipe)) result.output += buf.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("recembed_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_config(const fs::path& dir) {
  nlohmann::json cfg{
      {"seed", 5},
      {"precision", "f64"},
      {"min_freq", 1},
      {"shape",
       {{"p", 14}, {"w", 16}, {"h", 8}, {"q", 12}, {"n", 2}, {"e", 16}, {"heads", 4},
        {"ffn_dim", 32}, {"layers", 1}}},
      {"generator",
       {{"num_classes", 3},
        {"recipes_per_class", 10},
        {"ingredient_pool_per_class", 6},
        {"feature_dim", 10},
        {"sigma", 0.05},
        {"train_frac", 0.5},
        {"val_frac", 0.25}}},
      {"train",
       {{"batch_size", 4}, {"switches", 1}, {"patience", 1}, {"max_stage_epochs", 1},
        {"max_total_epochs", 10}}},
      {"eval", {{"subset_count", 2}, {"subset_size", 6}, {"ks", nlohmann::json::array({1, 5})}}},
      {"word2vec", {{"enabled", true}, {"epochs", 1}}},
      {"paths",
       {{"corpus", (dir / "data/corpus.jsonl").string()},
        {"features", (dir / "data/features.txt").string()},
        {"split", (dir / "data/split.json").string()},
        {"vocab", (dir / "prep/vocab.tsv").string()},
        {"tokenized", (dir / "prep/tokenized.jsonl").string()},
        {"embedding_init", (dir / "prep/embedding_init.bin").string()}}}};
  std::ofstream out(dir / "config.json");
  out << cfg.dump(2);
}

}  // namespace

TEST_CASE("cli pipeline: generate, preprocess, train, eval, exports") {
  TempDir tmp;
  write_config(tmp.path);
  const std::string cfg = " --config " + (tmp.path / "config.json").string();

  // generate: deterministic files, refusal without --force.
  auto gen = run_cli("generate" + cfg + " --out " + (tmp.path / "data").string());
  CHECK(gen.exit_code == 0);
  const std::string corpus_bytes = slurp(tmp.path / "data/corpus.jsonl");
  const std::string features_bytes = slurp(tmp.path / "data/features.txt");
  CHECK(!corpus_bytes.empty());

  auto refused = run_cli("generate" + cfg + " --out " + (tmp.path / "data").string());
  CHECK(refused.exit_code != 0);
  CHECK(refused.output.find("--force") != std::string::npos);

  auto forced = run_cli("generate" + cfg + " --out " + (tmp.path / "data").string() + " --force");
  CHECK(forced.exit_code == 0);
  CHECK(slurp(tmp.path / "data/corpus.jsonl") == corpus_bytes);  // same seed, same bytes
  CHECK(slurp(tmp.path / "data/features.txt") == features_bytes);

  // preprocess: vocabulary + tokenized corpus + pretrained embedding table.
  auto prep = run_cli("preprocess" + cfg + " --out " + (tmp.path / "prep").string());
  CHECK(prep.exit_code == 0);
  CHECK(fs::exists(tmp.path / "prep/vocab.tsv"));
  CHECK(fs::exists(tmp.path / "prep/tokenized.jsonl"));
  CHECK(fs::exists(tmp.path / "prep/embedding_init.bin"));

  // train: writes checkpoint + log; consumes the pretrained table.
  auto train = run_cli("train" + cfg + " --out " + (tmp.path / "run").string());
  CHECK(train.exit_code == 0);
  CHECK(fs::exists(tmp.path / "run/checkpoint.bin"));
  CHECK(fs::exists(tmp.path / "run/train_log.jsonl"));
  std::ifstream log(tmp.path / "run/train_log.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(log, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("epoch"));
    CHECK(j.contains("stage"));
    CHECK(j.contains("lr"));
    CHECK(j.contains("loss"));
    CHECK(j.contains("val_medr"));
    ++lines;
  }
  CHECK(lines >= 2);

  // eval: report with config echo.
  auto eval = run_cli("eval" + cfg + " --checkpoint " + (tmp.path / "run/checkpoint.bin").string() +
                      " --out " + (tmp.path / "report.json").string());
  CHECK(eval.exit_code == 0);
  CHECK(eval.output.find("MedR") != std::string::npos);
  auto report = nlohmann::json::parse(slurp(tmp.path / "report.json"));
  CHECK(report.at("config").contains("run"));
  CHECK(report.at("per_subset_medr").size() == 2);

  // eval without a checkpoint: nonzero exit naming the key.
  auto missing = run_cli("eval" + cfg);
  CHECK(missing.exit_code != 0);
  CHECK(missing.output.find("--checkpoint") != std::string::npos);

  // export-attention on a known recipe id.
  auto attn = run_cli("export-attention" + cfg + " --checkpoint " +
                      (tmp.path / "run/checkpoint.bin").string() + " --recipe-id r0_0");
  CHECK(attn.exit_code == 0);
  CHECK(attn.output.find("recipe_id\tr0_0") != std::string::npos);

  auto bad_id = run_cli("export-attention" + cfg + " --checkpoint " +
                        (tmp.path / "run/checkpoint.bin").string() + " --recipe-id nope");
  CHECK(bad_id.exit_code != 0);

  // export-embeddings to a file.
  auto emb = run_cli("export-embeddings" + cfg + " --checkpoint " +
                     (tmp.path / "run/checkpoint.bin").string() + " --split test --out " +
                     (tmp.path / "emb.tsv").string());
  CHECK(emb.exit_code == 0);
  CHECK(slurp(tmp.path / "emb.tsv").rfind("id\tmodality\tclass_id", 0) == 0);
}

TEST_CASE("cli gradcheck honors the f64 requirement") {
  auto wrong = run_cli("gradcheck --precision f32");
  CHECK(wrong.exit_code != 0);
  CHECK(wrong.output.find("f64") != std::string::npos);
}

TEST_CASE("cli rejects configs with unknown keys by name") {
  TempDir tmp;
  std::ofstream(tmp.path / "bad.json") << R"({"train": {"learning_rate": 1}})";
  auto r = run_cli("train --config " + (tmp.path / "bad.json").string() + " --out " +
                   (tmp.path / "out").string());
  CHECK(r.exit_code != 0);
  CHECK(r.output.find("train.learning_rate") != std::string::npos);
}
