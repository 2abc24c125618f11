#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "recembed/ad/ops.hpp"
#include "recembed/corpus/recipe.hpp"
#include "recembed/model/params.hpp"

namespace recembed::model {

using recembed::ad::Mask;

template <typename S>
Mat<S> sinusoidal_positions(int p, int w) {
  Mat<S> pe(p, w);
  for (int pos = 0; pos < p; ++pos)
    for (int j = 0; j < w; ++j) {
      const double rate = std::pow(10000.0, double(2 * (j / 2)) / w);
      const double angle = pos / rate;
      pe(pos, j) = S(j % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  return pe;
}

template <typename S>
struct EncodedInstructions {
  ad::Var<S> x;  // p x w
  Mask mask;     // true at real token positions
};

// Embedding lookup plus sinusoidal position information, padded to p.
template <typename S>
EncodedInstructions<S> positional_encode(const std::vector<int>& tokens,
                                         const WordEmbedding<S>& emb, const ShapeConfig& shape) {
  if (int(tokens.size()) > shape.p)
    throw std::invalid_argument("positional_encode: sequence longer than p");
  std::vector<int> padded = tokens;
  padded.resize(std::size_t(shape.p), corpus::Vocabulary::kPadId);
  Mask mask(shape.p);
  for (int i = 0; i < shape.p; ++i) mask(i) = i < int(tokens.size());

  auto looked = ad::lookup(emb.table, padded, corpus::Vocabulary::kPadId);
  auto pe = ad::Var<S>::constant(sinusoidal_positions<S>(shape.p, shape.w));
  return {ad::add(looked, pe), std::move(mask)};
}

template <typename S>
struct EncoderDebug {
  std::vector<Mat<S>> attention;  // one p x p row-stochastic matrix per (layer, head)
};

// Post-norm transformer encoder stack; masked positions neither attend out
// nor receive attention weight.
template <typename S>
ad::Var<S> self_attention_encode(const ad::Var<S>& input, const Mask& mask,
                                 const std::vector<EncoderLayerParams<S>>& layers,
                                 const ShapeConfig& shape, EncoderDebug<S>* debug = nullptr) {
  if (input.rows() != shape.p || input.cols() != shape.w)
    throw std::invalid_argument("self_attention_encode: input must be p x w");
  if (mask.size() != shape.p)
    throw std::invalid_argument("self_attention_encode: mask length must be p");

  const int dh = shape.w / shape.heads;
  ad::Var<S> x = input;
  for (const auto& layer : layers) {
    auto q = ad::matmul(x, layer.wq);
    auto k = ad::matmul(x, layer.wk);
    auto v = ad::matmul(x, layer.wv);
    std::vector<ad::Var<S>> head_outs;
    for (int head = 0; head < shape.heads; ++head) {
      auto qh = ad::cols(q, head * dh, dh);
      auto kh = ad::cols(k, head * dh, dh);
      auto vh = ad::cols(v, head * dh, dh);
      auto logits = ad::scale(ad::matmul(qh, ad::transpose(kh)), 1.0 / std::sqrt(double(dh)));
      auto weights = ad::masked_softmax_rows(logits, mask);
      if (debug) debug->attention.push_back(weights.value());
      head_outs.push_back(ad::matmul(weights, vh));
    }
    ad::Var<S> heads = head_outs[0];
    for (std::size_t i = 1; i < head_outs.size(); ++i) heads = ad::hcat(heads, head_outs[i]);
    auto attn = ad::matmul(heads, layer.wo);
    x = ad::layer_norm_rows(ad::add(x, attn), layer.ln1_g, layer.ln1_b);
    auto inner = ad::relu(ad::add_rowvec(ad::matmul(x, layer.ffn_w1), layer.ffn_b1));
    auto ffn = ad::add_rowvec(ad::matmul(inner, layer.ffn_w2), layer.ffn_b2);
    x = ad::layer_norm_rows(ad::add(x, ffn), layer.ln2_g, layer.ln2_b);
  }
  return x;
}

namespace detail {

template <typename S>
ad::Var<S> lstm_final_state(const ad::Var<S>& embedded, const LstmDirParams<S>& dir, int hidden,
                            bool reverse) {
  const Eigen::Index len = embedded.rows();
  ad::Var<S> h = ad::Var<S>::constant(Mat<S>::Zero(1, hidden));
  ad::Var<S> c = ad::Var<S>::constant(Mat<S>::Zero(1, hidden));
  for (Eigen::Index step = 0; step < len; ++step) {
    const Eigen::Index t = reverse ? len - 1 - step : step;
    auto x_t = ad::rows(embedded, t, 1);
    auto gates = ad::add_rowvec(ad::add(ad::matmul(x_t, dir.w), ad::matmul(h, dir.u)), dir.b);
    auto i = ad::sigmoid_(ad::cols(gates, 0, hidden));
    auto f = ad::sigmoid_(ad::cols(gates, hidden, hidden));
    auto g = ad::tanh_(ad::cols(gates, 2 * hidden, hidden));
    auto o = ad::sigmoid_(ad::cols(gates, 3 * hidden, hidden));
    c = ad::add(ad::cmul(f, c), ad::cmul(i, g));
    h = ad::cmul(o, ad::tanh_(c));
  }
  return h;
}

}  // namespace detail

// Bidirectional recurrent pass over the flattened ingredient tokens; the two
// final states concatenate to a length-q summary, independent of how many
// ingredient lines a recipe has.
template <typename S>
ad::Var<S> encode_ingredients(const std::vector<int>& flat_tokens, const BiLstmParams<S>& lstm,
                              const WordEmbedding<S>& emb) {
  if (flat_tokens.empty())
    throw std::invalid_argument("encode_ingredients: empty ingredient list");
  auto x = ad::lookup(emb.table, flat_tokens, corpus::Vocabulary::kPadId);
  auto fwd = detail::lstm_final_state(x, lstm.fwd, lstm.hidden, false);
  auto bwd = detail::lstm_final_state(x, lstm.bwd, lstm.hidden, true);
  return ad::hcat(fwd, bwd);
}

// Cross-attention reduction: keys/values from the encoded instructions,
// queries from the ingredient summary. Scores softmax over unmasked
// positions; each output row is the score-weighted sum of value rows.
template <typename S>
ad::Var<S> ingredient_attention(const ad::Var<S>& inst, const Mask& mask, const ad::Var<S>& ing,
                                const IngredientAttentionParams<S>& params, int h_dim,
                                Mat<S>* scores_out = nullptr) {
  if (mask.size() != inst.rows())
    throw std::invalid_argument("ingredient_attention: mask length must match positions");
  if (!mask.any()) throw std::invalid_argument("ingredient_attention: all positions masked");
  if (ing.rows() != 1) throw std::invalid_argument("ingredient_attention: ing must be a row");

  auto keys = ad::matmul(inst, params.wk);     // p x h
  auto values = ad::matmul(inst, params.wv);   // p x w
  auto keys_t = ad::transpose(keys);           // h x p
  const double inv_sqrt_dk = 1.0 / std::sqrt(double(h_dim));

  if (scores_out) scores_out->resize(Eigen::Index(params.wq.size()), inst.rows());
  std::vector<ad::Var<S>> outputs;
  for (std::size_t j = 0; j < params.wq.size(); ++j) {
    auto query = ad::matmul(ing, params.wq[j]);                       // 1 x h
    auto logits = ad::scale(ad::matmul(query, keys_t), inv_sqrt_dk);  // 1 x p
    auto scores = ad::masked_softmax_rows(logits, mask);
    if (scores_out) scores_out->row(Eigen::Index(j)) = scores.value().row(0);
    outputs.push_back(ad::matmul(scores, values));  // 1 x w
  }
  return ad::vcat(outputs);  // n x w
}

// Concatenate the ingredient summary with the flattened attention outputs,
// apply the fusion affine + tanh, and scale to unit length. A zero
// pre-activation yields the zero vector and sets *degenerate.
template <typename S>
ad::Var<S> fuse_and_project(const ad::Var<S>& ing, const ad::Var<S>& ia_out,
                            const FusionParams<S>& fuse, bool* degenerate = nullptr) {
  auto z = ad::hcat(ing, ad::flatten_to_row(ia_out));
  if (z.cols() != fuse.w.rows())
    throw std::invalid_argument("fuse_and_project: shape mismatch with fusion weights");
  auto pre = ad::tanh_(ad::add_rowvec(ad::matmul(z, fuse.w), fuse.b));
  if (degenerate) *degenerate = pre.value().norm() == S(0);
  return ad::l2_normalize_rows(pre);
}

template <typename S>
struct RecipeEncoding {
  ad::Var<S> embedding;  // 1 x e, unit length (or zeros when degenerate)
  bool degenerate = false;
  Mat<S> attention;      // first-stage scores, n x p (only when requested)
};

template <typename S>
RecipeEncoding<S> encode_recipe(const corpus::TokenizedRecipe& recipe, Model<S>& model,
                                bool want_attention = false) {
  RecipeEncoding<S> out;
  auto encoded = positional_encode(recipe.instruction_tokens, model.emb, model.shape);
  auto x = self_attention_encode(encoded.x, encoded.mask, model.enc, model.shape);
  auto ing = encode_ingredients(recipe.flat_ingredient_tokens(), model.lstm, model.emb);

  ad::Var<S> seq = x;
  Mask mask = encoded.mask;
  const auto widths = model.shape.attention_widths();
  for (std::size_t s = 0; s < model.ia.size(); ++s) {
    Mat<S>* scores = (s == 0 && want_attention) ? &out.attention : nullptr;
    seq = ingredient_attention(seq, mask, ing, model.ia[s], model.shape.h, scores);
    mask = Mask::Constant(widths[s], true);
  }
  out.embedding = fuse_and_project(ing, seq, model.fuse, &out.degenerate);
  return out;
}

}  // namespace recembed::model
