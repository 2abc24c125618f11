#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace recembed {

// Dense dimensions of the joint-embedding model: p instruction positions of
// w-dim word vectors, h-dim attention projections (d_k), q-dim ingredient
// summary, n reduced instruction vectors, e-dim joint space.
struct ShapeConfig {
  int p = 300;
  int w = 512;
  int h = 64;
  int q = 600;
  int n = 4;
  int e = 1024;
  int heads = 4;
  int ffn_dim = 1024;
  int layers = 2;
  // Step-wise attention reduction widths; empty means a single stage of n.
  std::vector<int> ia_widths;

  std::vector<int> attention_widths() const {
    return ia_widths.empty() ? std::vector<int>{n} : ia_widths;
  }

  int fused_input_dim() const { return q + attention_widths().back() * w; }

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v <= 0) throw std::invalid_argument(std::string("shape.") + name + " must be positive");
    };
    positive(p, "p");
    positive(w, "w");
    positive(h, "h");
    positive(q, "q");
    positive(n, "n");
    positive(e, "e");
    positive(heads, "heads");
    positive(ffn_dim, "ffn_dim");
    positive(layers, "layers");
    if (w % heads != 0) throw std::invalid_argument("shape.w must be divisible by shape.heads");
    if (q % 2 != 0) throw std::invalid_argument("shape.q must be even (two recurrent directions)");
    for (int v : ia_widths)
      if (v <= 0) throw std::invalid_argument("shape.ia_widths entries must be positive");
  }
};

}  // namespace recembed
