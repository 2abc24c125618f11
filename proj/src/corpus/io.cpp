#include "recembed/corpus/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace recembed::corpus {

namespace {

using nlohmann::json;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read file: " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  return out;
}

// Shortest round-trip decimal for a double.
std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

LoadResult load_corpus(const std::filesystem::path& path) {
  auto in = open_in(path);
  LoadResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      result.errors.push_back({line_no, "", "not valid JSON"});
      continue;
    }
    Recipe r;
    std::string bad_field;
    try {
      bad_field = "id";
      r.id = j.at("id").get<std::string>();
      bad_field = "title";
      r.title = j.at("title").get<std::string>();
      bad_field = "ingredients";
      r.ingredients = j.at("ingredients").get<std::vector<std::string>>();
      bad_field = "instructions";
      r.instructions = j.at("instructions").get<std::vector<std::string>>();
      bad_field = "class_id";
      r.class_id = j.at("class_id").get<int>();
      bad_field = "image_feature_ref";
      r.image_feature_ref = j.at("image_feature_ref").get<std::string>();
    } catch (const json::exception& e) {
      result.errors.push_back({line_no, bad_field, e.what()});
      continue;
    }
    result.recipes.push_back(std::move(r));
  }
  return result;
}

void save_corpus(const std::filesystem::path& path, const std::vector<Recipe>& recipes) {
  auto out = open_out(path);
  for (const auto& r : recipes) {
    json j{{"id", r.id},
           {"title", r.title},
           {"ingredients", r.ingredients},
           {"instructions", r.instructions},
           {"class_id", r.class_id},
           {"image_feature_ref", r.image_feature_ref}};
    out << j.dump() << '\n';
  }
}

FeatureStore load_feature_store(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("D=", 0) != 0)
    throw std::runtime_error("feature store: missing D=<int> header in " + path.string());
  const int dim = std::stoi(line.substr(2));
  if (dim <= 0) throw std::runtime_error("feature store: non-positive dimension");

  FeatureStore store;
  store.dim = dim;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id;
    ss >> id;
    Eigen::VectorXd values(dim);
    for (int d = 0; d < dim; ++d)
      if (!(ss >> values(d)))
        throw std::runtime_error("feature store: line " + std::to_string(line_no) +
                                 " has fewer than D values");
    double extra;
    if (ss >> extra)
      throw std::runtime_error("feature store: line " + std::to_string(line_no) +
                               " has more than D values");
    store.add(id, std::move(values));
  }
  return store;
}

void save_feature_store(const std::filesystem::path& path, const FeatureStore& store) {
  auto out = open_out(path);
  out << "D=" << store.dim << '\n';
  for (const auto& [id, values] : store.entries) {
    out << id;
    for (Eigen::Index d = 0; d < values.size(); ++d) out << ' ' << format_double(values(d));
    out << '\n';
  }
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  auto in = open_in(path);
  Vocabulary vocab;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("vocabulary: line " + std::to_string(line_no) + " missing tab");
    const std::string token = line.substr(0, tab);
    const int id = std::stoi(line.substr(tab + 1));
    if (token == "<pad>" || token == "<unk>") {
      const int expected = token == "<pad>" ? Vocabulary::kPadId : Vocabulary::kUnkId;
      if (id != expected)
        throw std::runtime_error("vocabulary: reserved token '" + token + "' has id " +
                                 std::to_string(id));
      continue;
    }
    const int got = vocab.add(token);
    if (got != id)
      throw std::runtime_error("vocabulary: line " + std::to_string(line_no) +
                               " id out of order (expected " + std::to_string(got) + ")");
  }
  return vocab;
}

void save_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto out = open_out(path);
  for (int id = 0; id < vocab.size(); ++id) out << vocab.token(id) << '\t' << id << '\n';
}

CorpusSplit load_split(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  in >> j;
  CorpusSplit split;
  try {
    split.train = j.at("train").get<std::vector<std::string>>();
    split.validation = j.at("validation").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw std::runtime_error("split file: " + std::string(e.what()));
  }
  if (!split.disjoint()) throw std::runtime_error("split file: partitions are not disjoint");
  return split;
}

void save_split(const std::filesystem::path& path, const CorpusSplit& split) {
  auto out = open_out(path);
  json j{{"train", split.train}, {"validation", split.validation}, {"test", split.test}};
  out << j.dump(2) << '\n';
}

std::vector<TokenizedRecipe> load_tokenized(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<TokenizedRecipe> recipes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      TokenizedRecipe r;
      r.id = j.at("id").get<std::string>();
      r.ingredient_tokens = j.at("ingredient_tokens").get<std::vector<std::vector<int>>>();
      r.instruction_tokens = j.at("instruction_tokens").get<std::vector<int>>();
      r.instruction_lens = j.at("instruction_lens").get<std::vector<int>>();
      r.class_id = j.at("class_id").get<int>();
      r.image_feature_ref = j.at("image_feature_ref").get<std::string>();
      if (!r.boundaries_partition())
        throw std::runtime_error("instruction_lens do not partition instruction_tokens");
      recipes.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("tokenized corpus line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return recipes;
}

void save_tokenized(const std::filesystem::path& path, const std::vector<TokenizedRecipe>& recipes) {
  auto out = open_out(path);
  for (const auto& r : recipes) {
    json j{{"id", r.id},
           {"ingredient_tokens", r.ingredient_tokens},
           {"instruction_tokens", r.instruction_tokens},
           {"instruction_lens", r.instruction_lens},
           {"class_id", r.class_id},
           {"image_feature_ref", r.image_feature_ref}};
    out << j.dump() << '\n';
  }
}

}  // namespace recembed::corpus
