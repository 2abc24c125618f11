#include "recembed/corpus/tokenize.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

namespace recembed::corpus {

namespace {

bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

std::string clean_token(std::string_view raw) {
  std::size_t b = 0, e = raw.size();
  while (b < e && is_punct(static_cast<unsigned char>(raw[b]))) ++b;
  while (e > b && is_punct(static_cast<unsigned char>(raw[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i)
    out.push_back(char(std::tolower(static_cast<unsigned char>(raw[i]))));
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      std::string tok = clean_token(text.substr(i, j - i));
      if (!tok.empty()) tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

std::optional<Recipe> filter_noisy_instructions(const Recipe& recipe) {
  Recipe out = recipe;
  out.instructions.clear();
  for (const auto& sentence : recipe.instructions)
    if (!tokenize(sentence).empty()) out.instructions.push_back(sentence);
  out.ingredients.clear();
  for (const auto& line : recipe.ingredients)
    if (!tokenize(line).empty()) out.ingredients.push_back(line);
  if (out.instructions.empty() || out.ingredients.empty()) return std::nullopt;
  return out;
}

std::vector<int> proportional_trim(const std::vector<int>& lengths, int cap) {
  int total = 0;
  int nonempty = 0;
  for (int len : lengths) {
    if (len < 0) throw std::invalid_argument("proportional_trim: negative length");
    total += len;
    if (len > 0) ++nonempty;
  }
  if (cap < nonempty)
    throw std::invalid_argument("proportional_trim: cap below instruction count");
  if (total <= cap) return lengths;

  const long long remove = total - cap;
  std::vector<int> kept(lengths.size());
  long long removed = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const long long share = remove * lengths[i] / total;  // floor; share < len for len > 0
    kept[i] = lengths[i] - int(share);
    removed += share;
  }
  long long deficit = remove - removed;
  while (deficit > 0) {
    std::size_t longest = 0;
    for (std::size_t i = 1; i < kept.size(); ++i)
      if (kept[i] > kept[longest]) longest = i;
    --kept[longest];
    --deficit;
  }
  return kept;
}

TokenizedRecipe trim_instructions(const TokenizedRecipe& recipe, int cap) {
  if (!recipe.boundaries_partition())
    throw std::invalid_argument("trim_instructions: boundaries do not partition the sequence");
  const std::vector<int> kept = proportional_trim(recipe.instruction_lens, cap);

  TokenizedRecipe out = recipe;
  out.instruction_tokens.clear();
  out.instruction_lens = kept;
  int offset = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    // Tail removal: keep the first kept[i] tokens of instruction i.
    out.instruction_tokens.insert(out.instruction_tokens.end(),
                                  recipe.instruction_tokens.begin() + offset,
                                  recipe.instruction_tokens.begin() + offset + kept[i]);
    offset += recipe.instruction_lens[i];
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sequences, int min_freq) {
  if (sequences.empty()) throw std::invalid_argument("build_vocabulary: empty corpus");
  std::map<std::string, long long> freq;  // ordered map keeps ties lexicographic
  for (const auto& seq : sequences)
    for (const auto& tok : seq) ++freq[tok];

  std::vector<std::pair<std::string, long long>> entries(freq.begin(), freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  for (const auto& [tok, count] : entries)
    if (count >= min_freq) vocab.add(tok);
  return vocab;
}

std::optional<TokenizedRecipe> encode_tokens(const Recipe& recipe, const Vocabulary& vocab, int cap,
                                             std::string* why) {
  auto cleaned = filter_noisy_instructions(recipe);
  if (!cleaned) {
    if (why) *why = "no ingredients or instructions left after cleaning";
    return std::nullopt;
  }

  TokenizedRecipe out;
  out.id = cleaned->id;
  out.class_id = cleaned->class_id;
  out.image_feature_ref = cleaned->image_feature_ref;
  for (const auto& line : cleaned->ingredients) {
    std::vector<int> ids;
    for (const auto& tok : tokenize(line)) ids.push_back(vocab.id(tok));
    out.ingredient_tokens.push_back(std::move(ids));
  }
  for (const auto& sentence : cleaned->instructions) {
    const auto toks = tokenize(sentence);
    for (const auto& tok : toks) out.instruction_tokens.push_back(vocab.id(tok));
    out.instruction_lens.push_back(int(toks.size()));
  }

  if (int(out.instruction_lens.size()) > cap) {
    if (why) *why = "instruction count exceeds the word cap";
    return std::nullopt;
  }
  return trim_instructions(out, cap);
}

}  // namespace recembed::corpus
