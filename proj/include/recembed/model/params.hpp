#pragma once

#include <string>
#include <vector>

#include "recembed/ad/graph.hpp"
#include "recembed/core/rng.hpp"
#include "recembed/core/shape.hpp"

namespace recembed::model {

using recembed::ad::Mat;
using recembed::ad::Var;

template <typename S>
struct WordEmbedding {
  Var<S> table;  // vocab x w; row 0 is the padding row and stays zero
};

template <typename S>
struct EncoderLayerParams {
  Var<S> wq, wk, wv, wo;          // w x w projections
  Var<S> ln1_g, ln1_b;            // post-attention norm
  Var<S> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Var<S> ln2_g, ln2_b;            // post-ffn norm
};

template <typename S>
struct LstmDirParams {
  Var<S> w;  // in x 4H, gate order i,f,g,o
  Var<S> u;  // H x 4H
  Var<S> b;  // 1 x 4H
};

template <typename S>
struct BiLstmParams {
  LstmDirParams<S> fwd, bwd;
  int hidden = 0;  // per direction; concatenated output is 2*hidden = q
};

template <typename S>
struct IngredientAttentionParams {
  Var<S> wk;               // w x h
  Var<S> wv;               // w x w
  std::vector<Var<S>> wq;  // n matrices, q x h
};

template <typename S>
struct FusionParams {
  Var<S> w;  // (q + n*w) x e
  Var<S> b;  // 1 x e
};

template <typename S>
struct ImageHeadParams {
  Var<S> w;  // D x e
  Var<S> b;  // 1 x e
};

template <typename S>
struct ClassifierParams {
  Var<S> w;  // e x num_classes, shared across modalities
  Var<S> b;  // 1 x num_classes
};

enum class ParamGroup { Text, Image, Objective };

template <typename S>
struct NamedParam {
  std::string name;
  Var<S> var;
  ParamGroup group;
};

template <typename S>
struct Model {
  ShapeConfig shape;
  int vocab_size = 0;
  int feature_dim = 0;
  int num_classes = 0;

  WordEmbedding<S> emb;
  std::vector<EncoderLayerParams<S>> enc;
  BiLstmParams<S> lstm;
  std::vector<IngredientAttentionParams<S>> ia;
  FusionParams<S> fuse;
  ImageHeadParams<S> img;
  ClassifierParams<S> clf;

  std::vector<NamedParam<S>> params();  // stable order, defines checkpoint layout
};

namespace detail {

template <typename S>
Var<S> glorot(Rng& rng, int rows, int cols) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Mat<S> m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = S(rng.uniform(-limit, limit));
  return Var<S>::param(std::move(m));
}

template <typename S>
Var<S> zeros(int rows, int cols) {
  return Var<S>::param(Mat<S>::Zero(rows, cols));
}

template <typename S>
Var<S> ones(int rows, int cols) {
  return Var<S>::param(Mat<S>::Ones(rows, cols));
}

// Zero bias except the forget gate, which opens at one.
template <typename S>
Var<S> lstm_bias(int hidden) {
  Mat<S> b = Mat<S>::Zero(1, 4 * hidden);
  b.middleCols(hidden, hidden).setOnes();
  return Var<S>::param(std::move(b));
}

}  // namespace detail

template <typename S>
Model<S> init_model(const ShapeConfig& shape, int vocab_size, int feature_dim, int num_classes,
                    std::uint64_t seed) {
  shape.validate();
  if (vocab_size < 2) throw std::invalid_argument("init_model: vocabulary too small");
  if (feature_dim <= 0) throw std::invalid_argument("init_model: feature_dim must be positive");
  if (num_classes <= 0) throw std::invalid_argument("init_model: num_classes must be positive");

  Model<S> m;
  m.shape = shape;
  m.vocab_size = vocab_size;
  m.feature_dim = feature_dim;
  m.num_classes = num_classes;

  Rng rng(derive_seed(seed, 0x6d6f64656cULL));

  {
    const double scale = 0.5 / shape.w;
    Mat<S> table(vocab_size, shape.w);
    for (int i = 0; i < vocab_size; ++i)
      for (int j = 0; j < shape.w; ++j) table(i, j) = S(rng.uniform(-scale, scale));
    table.row(0).setZero();
    m.emb.table = Var<S>::param(std::move(table));
  }

  for (int l = 0; l < shape.layers; ++l) {
    EncoderLayerParams<S> layer;
    layer.wq = detail::glorot<S>(rng, shape.w, shape.w);
    layer.wk = detail::glorot<S>(rng, shape.w, shape.w);
    layer.wv = detail::glorot<S>(rng, shape.w, shape.w);
    layer.wo = detail::glorot<S>(rng, shape.w, shape.w);
    layer.ln1_g = detail::ones<S>(1, shape.w);
    layer.ln1_b = detail::zeros<S>(1, shape.w);
    layer.ffn_w1 = detail::glorot<S>(rng, shape.w, shape.ffn_dim);
    layer.ffn_b1 = detail::zeros<S>(1, shape.ffn_dim);
    layer.ffn_w2 = detail::glorot<S>(rng, shape.ffn_dim, shape.w);
    layer.ffn_b2 = detail::zeros<S>(1, shape.w);
    layer.ln2_g = detail::ones<S>(1, shape.w);
    layer.ln2_b = detail::zeros<S>(1, shape.w);
    m.enc.push_back(std::move(layer));
  }

  const int hidden = shape.q / 2;
  m.lstm.hidden = hidden;
  for (auto* dir : {&m.lstm.fwd, &m.lstm.bwd}) {
    dir->w = detail::glorot<S>(rng, shape.w, 4 * hidden);
    dir->u = detail::glorot<S>(rng, hidden, 4 * hidden);
    dir->b = detail::lstm_bias<S>(hidden);
  }

  for (int width : shape.attention_widths()) {
    IngredientAttentionParams<S> stage;
    stage.wk = detail::glorot<S>(rng, shape.w, shape.h);
    stage.wv = detail::glorot<S>(rng, shape.w, shape.w);
    for (int j = 0; j < width; ++j) stage.wq.push_back(detail::glorot<S>(rng, shape.q, shape.h));
    m.ia.push_back(std::move(stage));
  }

  m.fuse.w = detail::glorot<S>(rng, shape.fused_input_dim(), shape.e);
  m.fuse.b = detail::zeros<S>(1, shape.e);
  m.img.w = detail::glorot<S>(rng, feature_dim, shape.e);
  m.img.b = detail::zeros<S>(1, shape.e);
  m.clf.w = detail::glorot<S>(rng, shape.e, num_classes);
  m.clf.b = detail::zeros<S>(1, num_classes);
  return m;
}

template <typename S>
std::vector<NamedParam<S>> Model<S>::params() {
  std::vector<NamedParam<S>> out;
  auto push = [&out](std::string name, const Var<S>& v, ParamGroup g) {
    out.push_back({std::move(name), v, g});
  };
  push("emb.table", emb.table, ParamGroup::Text);
  for (std::size_t l = 0; l < enc.size(); ++l) {
    const std::string p = "enc.l" + std::to_string(l) + ".";
    push(p + "attn.wq", enc[l].wq, ParamGroup::Text);
    push(p + "attn.wk", enc[l].wk, ParamGroup::Text);
    push(p + "attn.wv", enc[l].wv, ParamGroup::Text);
    push(p + "attn.wo", enc[l].wo, ParamGroup::Text);
    push(p + "ln1.g", enc[l].ln1_g, ParamGroup::Text);
    push(p + "ln1.b", enc[l].ln1_b, ParamGroup::Text);
    push(p + "ffn.w1", enc[l].ffn_w1, ParamGroup::Text);
    push(p + "ffn.b1", enc[l].ffn_b1, ParamGroup::Text);
    push(p + "ffn.w2", enc[l].ffn_w2, ParamGroup::Text);
    push(p + "ffn.b2", enc[l].ffn_b2, ParamGroup::Text);
    push(p + "ln2.g", enc[l].ln2_g, ParamGroup::Text);
    push(p + "ln2.b", enc[l].ln2_b, ParamGroup::Text);
  }
  push("lstm.fwd.w", lstm.fwd.w, ParamGroup::Text);
  push("lstm.fwd.u", lstm.fwd.u, ParamGroup::Text);
  push("lstm.fwd.b", lstm.fwd.b, ParamGroup::Text);
  push("lstm.bwd.w", lstm.bwd.w, ParamGroup::Text);
  push("lstm.bwd.u", lstm.bwd.u, ParamGroup::Text);
  push("lstm.bwd.b", lstm.bwd.b, ParamGroup::Text);
  for (std::size_t s = 0; s < ia.size(); ++s) {
    const std::string p = "ia.s" + std::to_string(s) + ".";
    push(p + "wk", ia[s].wk, ParamGroup::Text);
    push(p + "wv", ia[s].wv, ParamGroup::Text);
    for (std::size_t j = 0; j < ia[s].wq.size(); ++j)
      push(p + "wq" + std::to_string(j), ia[s].wq[j], ParamGroup::Text);
  }
  push("fuse.w", fuse.w, ParamGroup::Text);
  push("fuse.b", fuse.b, ParamGroup::Text);
  push("img.w", img.w, ParamGroup::Image);
  push("img.b", img.b, ParamGroup::Image);
  push("clf.w", clf.w, ParamGroup::Objective);
  push("clf.b", clf.b, ParamGroup::Objective);
  return out;
}

}  // namespace recembed::model
