#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "recembed/core/shape.hpp"
#include "recembed/corpus/synthetic.hpp"
#include "recembed/embed/word2vec.hpp"
#include "recembed/eval/evaluate.hpp"
#include "recembed/objectives/losses.hpp"
#include "recembed/train/schedule.hpp"

namespace recembed {

struct PathsConfig {
  std::string corpus;
  std::string features;
  std::string split;
  std::string vocab;
  std::string tokenized;
  std::string embedding_init;  // optional pretrained word-embedding checkpoint
  std::string checkpoint;
  std::string out_dir;
};

// One merged configuration drives every command; reports echo it back fully
// resolved so runs are reproducible from their own artifacts.
struct RunConfig {
  ShapeConfig shape;
  objectives::LossConfig loss;
  train::TrainConfig train;
  eval::EvalConfig eval;
  corpus::GeneratorSpec generator;
  embed::SkipGramConfig word2vec;
  int min_freq = 2;
  std::string precision = "f64";
  std::uint64_t seed = 42;
  PathsConfig paths;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

}  // namespace recembed
