#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "recembed/ad/graph.hpp"

namespace recembed::ad {

namespace detail {

template <typename S>
Var<S> make_node(Mat<S> value, std::vector<std::shared_ptr<Node<S>>> parents,
                 std::function<void(Node<S>&)> backprop) {
  auto n = std::make_shared<Node<S>>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents)
    if (p->requires_grad) {
      n->requires_grad = true;
      break;
    }
  if (n->requires_grad) n->backprop = std::move(backprop);
  return Var<S>(std::move(n));
}

template <typename S>
void accum(Node<S>* p, const Mat<S>& g) {
  if (!p->requires_grad) return;
  p->ensure_grad();
  p->grad += g;
}

inline void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace detail

template <typename S>
Var<S> add(const Var<S>& a, const Var<S>& b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_node<S>(a.value() + b.value(), {a.ptr(), b.ptr()}, [an, bn](Node<S>& self) {
    detail::accum(an, self.grad);
    detail::accum(bn, self.grad);
  });
}

template <typename S>
Var<S> sub(const Var<S>& a, const Var<S>& b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_node<S>(a.value() - b.value(), {a.ptr(), b.ptr()}, [an, bn](Node<S>& self) {
    detail::accum(an, self.grad);
    if (bn->requires_grad) {
      bn->ensure_grad();
      bn->grad -= self.grad;
    }
  });
}

template <typename S>
Var<S> cmul(const Var<S>& a, const Var<S>& b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "cmul: shape mismatch");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_node<S>(a.value().cwiseProduct(b.value()), {a.ptr(), b.ptr()},
                              [an, bn](Node<S>& self) {
                                detail::accum<S>(an, self.grad.cwiseProduct(bn->value));
                                detail::accum<S>(bn, self.grad.cwiseProduct(an->value));
                              });
}

// Broadcast a 1xC row vector over every row of a.
template <typename S>
Var<S> add_rowvec(const Var<S>& a, const Var<S>& b) {
  detail::check(b.rows() == 1 && b.cols() == a.cols(), "add_rowvec: bias must be 1 x cols(a)");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  Mat<S> v = a.value();
  v.rowwise() += b.value().row(0);
  return detail::make_node<S>(std::move(v), {a.ptr(), b.ptr()}, [an, bn](Node<S>& self) {
    detail::accum(an, self.grad);
    if (bn->requires_grad) {
      bn->ensure_grad();
      bn->grad.row(0) += self.grad.colwise().sum();
    }
  });
}

template <typename S>
Var<S> scale(const Var<S>& a, double k) {
  Node<S>* an = a.node();
  const S ks = S(k);
  return detail::make_node<S>(a.value() * ks, {a.ptr()}, [an, ks](Node<S>& self) {
    detail::accum<S>(an, (self.grad * ks).eval());
  });
}

// k*a + c, elementwise.
template <typename S>
Var<S> affine(const Var<S>& a, double k, double c) {
  Node<S>* an = a.node();
  const S ks = S(k);
  return detail::make_node<S>((a.value().array() * ks + S(c)).matrix(), {a.ptr()},
                              [an, ks](Node<S>& self) {
                                detail::accum<S>(an, (self.grad * ks).eval());
                              });
}

template <typename S>
Var<S> matmul(const Var<S>& a, const Var<S>& b) {
  detail::check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_node<S>(a.value() * b.value(), {a.ptr(), b.ptr()}, [an, bn](Node<S>& self) {
    if (an->requires_grad) {
      an->ensure_grad();
      an->grad.noalias() += self.grad * bn->value.transpose();
    }
    if (bn->requires_grad) {
      bn->ensure_grad();
      bn->grad.noalias() += an->value.transpose() * self.grad;
    }
  });
}

template <typename S>
Var<S> transpose(const Var<S>& a) {
  Node<S>* an = a.node();
  return detail::make_node<S>(a.value().transpose(), {a.ptr()}, [an](Node<S>& self) {
    detail::accum<S>(an, self.grad.transpose().eval());
  });
}

template <typename S>
Var<S> tanh_(const Var<S>& a) {
  Node<S>* an = a.node();
  return detail::make_node<S>(a.value().array().tanh().matrix(), {a.ptr()}, [an](Node<S>& self) {
    detail::accum<S>(an, (self.grad.array() * (S(1) - self.value.array().square())).matrix());
  });
}

template <typename S>
Var<S> sigmoid_(const Var<S>& a) {
  Node<S>* an = a.node();
  Mat<S> v = (S(1) / (S(1) + (-a.value().array()).exp())).matrix();
  return detail::make_node<S>(std::move(v), {a.ptr()}, [an](Node<S>& self) {
    detail::accum<S>(an,
                     (self.grad.array() * self.value.array() * (S(1) - self.value.array())).matrix());
  });
}

// max(0, x); also serves as the hinge in the margin losses.
template <typename S>
Var<S> relu(const Var<S>& a) {
  Node<S>* an = a.node();
  return detail::make_node<S>(a.value().cwiseMax(S(0)), {a.ptr()}, [an](Node<S>& self) {
    detail::accum<S>(an,
                     (self.grad.array() * (an->value.array() > S(0)).template cast<S>()).matrix());
  });
}

template <typename S>
Var<S> rows(const Var<S>& a, Eigen::Index r0, Eigen::Index count) {
  detail::check(r0 >= 0 && r0 + count <= a.rows(), "rows: slice out of range");
  Node<S>* an = a.node();
  return detail::make_node<S>(a.value().middleRows(r0, count), {a.ptr()},
                              [an, r0, count](Node<S>& self) {
                                if (!an->requires_grad) return;
                                an->ensure_grad();
                                an->grad.middleRows(r0, count) += self.grad;
                              });
}

template <typename S>
Var<S> cols(const Var<S>& a, Eigen::Index c0, Eigen::Index count) {
  detail::check(c0 >= 0 && c0 + count <= a.cols(), "cols: slice out of range");
  Node<S>* an = a.node();
  return detail::make_node<S>(a.value().middleCols(c0, count), {a.ptr()},
                              [an, c0, count](Node<S>& self) {
                                if (!an->requires_grad) return;
                                an->ensure_grad();
                                an->grad.middleCols(c0, count) += self.grad;
                              });
}

template <typename S>
Var<S> hcat(const Var<S>& a, const Var<S>& b) {
  detail::check(a.rows() == b.rows(), "hcat: row counts differ");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  Mat<S> v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  const Eigen::Index ac = a.cols();
  return detail::make_node<S>(std::move(v), {a.ptr(), b.ptr()}, [an, bn, ac](Node<S>& self) {
    detail::accum<S>(an, self.grad.leftCols(ac).eval());
    detail::accum<S>(bn, self.grad.rightCols(self.grad.cols() - ac).eval());
  });
}

template <typename S>
Var<S> vcat(const std::vector<Var<S>>& parts) {
  detail::check(!parts.empty(), "vcat: empty list");
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    detail::check(p.cols() == parts[0].cols(), "vcat: column counts differ");
    total += p.rows();
  }
  Mat<S> v(total, parts[0].cols());
  std::vector<std::shared_ptr<Node<S>>> parents;
  std::vector<Node<S>*> raw;
  std::vector<Eigen::Index> offs, cnts;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    v.middleRows(r, p.rows()) = p.value();
    parents.push_back(p.ptr());
    raw.push_back(p.node());
    offs.push_back(r);
    cnts.push_back(p.rows());
    r += p.rows();
  }
  return detail::make_node<S>(std::move(v), std::move(parents),
                              [raw, offs, cnts](Node<S>& self) {
                                for (std::size_t i = 0; i < raw.size(); ++i) {
                                  if (!raw[i]->requires_grad) continue;
                                  raw[i]->ensure_grad();
                                  raw[i]->grad += self.grad.middleRows(offs[i], cnts[i]);
                                }
                              });
}

// Row-major flatten of an r x c matrix into 1 x (r*c).
template <typename S>
Var<S> flatten_to_row(const Var<S>& a) {
  Node<S>* an = a.node();
  const Eigen::Index r = a.rows(), c = a.cols();
  Mat<S> v(1, r * c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) v(0, i * c + j) = a.value()(i, j);
  return detail::make_node<S>(std::move(v), {a.ptr()}, [an, r, c](Node<S>& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) an->grad(i, j) += self.grad(0, i * c + j);
  });
}

// Gather rows of an embedding table. The padding row never receives gradient.
template <typename S>
Var<S> lookup(const Var<S>& table, const std::vector<int>& ids, int pad_id) {
  Node<S>* tn = table.node();
  for (int id : ids)
    detail::check(id >= 0 && id < table.rows(), "lookup: token id out of range");
  Mat<S> v(Eigen::Index(ids.size()), table.cols());
  for (std::size_t t = 0; t < ids.size(); ++t) v.row(Eigen::Index(t)) = table.value().row(ids[t]);
  return detail::make_node<S>(std::move(v), {table.ptr()}, [tn, ids, pad_id](Node<S>& self) {
    if (!tn->requires_grad) return;
    tn->ensure_grad();
    for (std::size_t t = 0; t < ids.size(); ++t)
      if (ids[t] != pad_id) tn->grad.row(ids[t]) += self.grad.row(Eigen::Index(t));
  });
}

// Softmax along each row, restricted to allowed columns; disallowed columns
// are exactly zero. A fully disallowed row yields all zeros.
template <typename S>
Var<S> masked_softmax_rows(const Var<S>& a, const Mask& allowed) {
  detail::check(allowed.size() == a.cols(), "masked_softmax_rows: mask length != cols");
  Node<S>* an = a.node();
  const Eigen::Index r = a.rows(), c = a.cols();
  Mat<S> v = Mat<S>::Zero(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    S m = std::numeric_limits<S>::lowest();
    bool any = false;
    for (Eigen::Index j = 0; j < c; ++j)
      if (allowed(j)) {
        any = true;
        m = std::max(m, a.value()(i, j));
      }
    if (!any) continue;
    S z = S(0);
    for (Eigen::Index j = 0; j < c; ++j)
      if (allowed(j)) {
        v(i, j) = std::exp(a.value()(i, j) - m);
        z += v(i, j);
      }
    for (Eigen::Index j = 0; j < c; ++j)
      if (allowed(j)) v(i, j) /= z;
  }
  Mask mask = allowed;
  return detail::make_node<S>(std::move(v), {a.ptr()}, [an, mask](Node<S>& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    const Eigen::Index r = self.value.rows(), c = self.value.cols();
    for (Eigen::Index i = 0; i < r; ++i) {
      S dot = S(0);
      for (Eigen::Index j = 0; j < c; ++j)
        if (mask(j)) dot += self.grad(i, j) * self.value(i, j);
      for (Eigen::Index j = 0; j < c; ++j)
        if (mask(j)) an->grad(i, j) += self.value(i, j) * (self.grad(i, j) - dot);
    }
  });
}

// Per-row layer normalization with learned gain/shift (1 x cols each).
template <typename S>
Var<S> layer_norm_rows(const Var<S>& a, const Var<S>& gamma, const Var<S>& beta, double eps = 1e-5) {
  detail::check(gamma.rows() == 1 && gamma.cols() == a.cols(), "layer_norm: gamma must be 1 x cols");
  detail::check(beta.rows() == 1 && beta.cols() == a.cols(), "layer_norm: beta must be 1 x cols");
  Node<S>* an = a.node();
  Node<S>* gn = gamma.node();
  Node<S>* bn = beta.node();
  const Eigen::Index r = a.rows(), c = a.cols();
  auto xhat = std::make_shared<Mat<S>>(r, c);
  auto inv_std = std::make_shared<Eigen::Matrix<S, Eigen::Dynamic, 1>>(r);
  Mat<S> v(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const S mu = a.value().row(i).mean();
    const S var = (a.value().row(i).array() - mu).square().mean();
    const S is = S(1) / std::sqrt(var + S(eps));
    (*inv_std)(i) = is;
    xhat->row(i) = ((a.value().row(i).array() - mu) * is).matrix();
    v.row(i) =
        (xhat->row(i).array() * gamma.value().row(0).array() + beta.value().row(0).array()).matrix();
  }
  return detail::make_node<S>(
      std::move(v), {a.ptr(), gamma.ptr(), beta.ptr()}, [an, gn, bn, xhat, inv_std](Node<S>& self) {
        const Eigen::Index r = self.value.rows(), c = self.value.cols();
        if (gn->requires_grad) {
          gn->ensure_grad();
          gn->grad.row(0) += (self.grad.array() * xhat->array()).colwise().sum().matrix();
        }
        if (bn->requires_grad) {
          bn->ensure_grad();
          bn->grad.row(0) += self.grad.colwise().sum();
        }
        if (!an->requires_grad) return;
        an->ensure_grad();
        (void)c;
        for (Eigen::Index i = 0; i < r; ++i) {
          Eigen::Array<S, 1, Eigen::Dynamic> dxhat =
              self.grad.row(i).array() * gn->value.row(0).array();
          const S m1 = dxhat.mean();
          const S m2 = (dxhat * xhat->row(i).array()).mean();
          an->grad.row(i) += ((dxhat - m1 - xhat->row(i).array() * m2) * (*inv_std)(i)).matrix();
        }
      });
}

// Rows scaled to unit Euclidean length; an exactly zero row stays zero.
template <typename S>
Var<S> l2_normalize_rows(const Var<S>& a) {
  Node<S>* an = a.node();
  const Eigen::Index r = a.rows();
  auto norms = std::make_shared<Eigen::Matrix<S, Eigen::Dynamic, 1>>(r);
  Mat<S> v = a.value();
  for (Eigen::Index i = 0; i < r; ++i) {
    const S nrm = a.value().row(i).norm();
    (*norms)(i) = nrm;
    if (nrm != S(0)) v.row(i) /= nrm;
  }
  return detail::make_node<S>(std::move(v), {a.ptr()}, [an, norms](Node<S>& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    for (Eigen::Index i = 0; i < self.value.rows(); ++i) {
      const S nrm = (*norms)(i);
      if (nrm == S(0)) continue;
      const S gy = self.grad.row(i).dot(self.value.row(i));
      an->grad.row(i) += (self.grad.row(i) - self.value.row(i) * gy) / nrm;
    }
  });
}

// Sum of elementwise products; shapes must match. Returns 1x1.
template <typename S>
Var<S> dot(const Var<S>& a, const Var<S>& b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "dot: shape mismatch");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  Mat<S> v(1, 1);
  v(0, 0) = a.value().cwiseProduct(b.value()).sum();
  return detail::make_node<S>(std::move(v), {a.ptr(), b.ptr()}, [an, bn](Node<S>& self) {
    const S g = self.grad(0, 0);
    detail::accum<S>(an, (bn->value * g).eval());
    detail::accum<S>(bn, (an->value * g).eval());
  });
}

template <typename S>
Var<S> sum(const Var<S>& a) {
  Node<S>* an = a.node();
  Mat<S> v(1, 1);
  v(0, 0) = a.value().sum();
  return detail::make_node<S>(std::move(v), {a.ptr()}, [an](Node<S>& self) {
    if (!an->requires_grad) return;
    an->ensure_grad();
    an->grad.array() += self.grad(0, 0);
  });
}

template <typename S>
Var<S> add_n(const std::vector<Var<S>>& parts) {
  detail::check(!parts.empty(), "add_n: empty list");
  Mat<S> v = parts[0].value();
  std::vector<std::shared_ptr<Node<S>>> parents{parts[0].ptr()};
  std::vector<Node<S>*> raw{parts[0].node()};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    detail::check(parts[i].rows() == v.rows() && parts[i].cols() == v.cols(),
                  "add_n: shape mismatch");
    v += parts[i].value();
    parents.push_back(parts[i].ptr());
    raw.push_back(parts[i].node());
  }
  return detail::make_node<S>(std::move(v), std::move(parents), [raw](Node<S>& self) {
    for (Node<S>* p : raw) detail::accum(p, self.grad);
  });
}

template <typename S>
Var<S> sqrt_(const Var<S>& a) {
  Node<S>* an = a.node();
  return detail::make_node<S>(a.value().array().sqrt().matrix(), {a.ptr()}, [an](Node<S>& self) {
    detail::accum<S>(an, (self.grad.array() * (S(0.5) / self.value.array())).matrix());
  });
}

template <typename S>
Var<S> div(const Var<S>& a, const Var<S>& b) {
  detail::check(a.rows() == b.rows() && a.cols() == b.cols(), "div: shape mismatch");
  Node<S>* an = a.node();
  Node<S>* bn = b.node();
  return detail::make_node<S>(a.value().cwiseQuotient(b.value()), {a.ptr(), b.ptr()},
                              [an, bn](Node<S>& self) {
                                detail::accum<S>(an, self.grad.cwiseQuotient(bn->value).eval());
                                detail::accum<S>(
                                    bn, (-(self.grad.cwiseProduct(self.value).cwiseQuotient(bn->value)))
                                            .eval());
                              });
}

// Numerically stable cross-entropy of softmax(logits) against a class index.
template <typename S>
Var<S> softmax_xent(const Var<S>& logits, int target) {
  detail::check(logits.rows() == 1, "softmax_xent: logits must be a row vector");
  detail::check(target >= 0 && target < logits.cols(), "softmax_xent: class id out of range");
  Node<S>* ln = logits.node();
  const S m = logits.value().maxCoeff();
  const S lse = m + std::log((logits.value().array() - m).exp().sum());
  Mat<S> v(1, 1);
  v(0, 0) = lse - logits.value()(0, target);
  auto probs = std::make_shared<Mat<S>>((logits.value().array() - lse).exp().matrix());
  return detail::make_node<S>(std::move(v), {logits.ptr()}, [ln, probs, target](Node<S>& self) {
    if (!ln->requires_grad) return;
    ln->ensure_grad();
    Mat<S> g = *probs;
    g(0, target) -= S(1);
    ln->grad += g * self.grad(0, 0);
  });
}

// dot(a,b) / sqrt(dot(a,a)*dot(b,b)); exact 1 for identical inputs.
template <typename S>
Var<S> cosine(const Var<S>& a, const Var<S>& b) {
  auto num = dot(a, b);
  auto den = sqrt_(cmul(dot(a, a), dot(b, b)));
  return div(num, den);
}

}  // namespace recembed::ad
