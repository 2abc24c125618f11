#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recembed/corpus/recipe.hpp"

namespace recembed::corpus {

// Lowercase, split on whitespace, strip leading/trailing punctuation from each
// token; tokens left empty (punctuation-only) are dropped.
std::vector<std::string> tokenize(std::string_view text);

// Drops instruction sentences (and ingredient lines) that carry no tokens.
// Returns nullopt when nothing usable remains; rejection is an outcome, not an
// error.
std::optional<Recipe> filter_noisy_instructions(const Recipe& recipe);

// Kept length per instruction under the proportional trimming rule: each
// instruction loses floor(R*len/T) tokens from its tail, then the rounding
// deficit is taken one token at a time from the currently longest instruction
// (lowest index on ties). Throws if cap < number of non-empty instructions.
std::vector<int> proportional_trim(const std::vector<int>& lengths, int cap);

TokenizedRecipe trim_instructions(const TokenizedRecipe& recipe, int cap);

Vocabulary build_vocabulary(const std::vector<std::vector<std::string>>& sequences, int min_freq);

// Tokenize + encode + trim a cleaned recipe. Rejections (nothing left to
// encode, or more instructions than the cap allows) return nullopt and set
// *why when given.
std::optional<TokenizedRecipe> encode_tokens(const Recipe& recipe, const Vocabulary& vocab, int cap,
                                             std::string* why = nullptr);

}  // namespace recembed::corpus
