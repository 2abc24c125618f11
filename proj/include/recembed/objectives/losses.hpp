#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "recembed/ad/ops.hpp"
#include "recembed/model/params.hpp"

namespace recembed::objectives {

using recembed::ad::Var;

struct LossConfig {
  double alpha_cos = 0.1;  // cosine margin for negative pairs
  double lambda = 0.02;    // semantic regularization weight
  double alpha_tri = 0.3;
  double beta = 0.1;   // quadratic vs linear weight
  double gamma = 0.3;  // semantic vs sample weight
  int num_classes = 0;

  void validate() const {
    if (alpha_cos < -1.0 || alpha_cos > 1.0)
      throw std::invalid_argument("loss.alpha_cos must lie in [-1, 1]");
    if (beta < 0.0 || beta > 1.0) throw std::invalid_argument("loss.beta must lie in [0, 1]");
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("loss.gamma must lie in [0, 1]");
    if (alpha_tri < 0.0 || alpha_tri > 2.0)
      throw std::invalid_argument("loss.alpha_tri must lie in [0, 2]");
    if (lambda < 0.0) throw std::invalid_argument("loss.lambda must be non-negative");
  }
};

struct PairSample {
  Eigen::VectorXd phi_q;  // text embedding
  Eigen::VectorXd phi_d;  // image embedding
  int y = 1;              // +1 matching, -1 non-matching
  int c_r = 0;
  int c_v = 0;
};

struct TripletSample {
  Eigen::VectorXd phi_q;
  Eigen::VectorXd phi_d_pos;
  Eigen::VectorXd phi_d_neg;
  Eigen::VectorXd phi_sem_pos;  // same class as the query, not the true match
  Eigen::VectorXd phi_sem_neg;  // different class
};

// ---- plain evaluations over embedding vectors ----

inline double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: size mismatch");
  const double aa = a.dot(a);
  const double bb = b.dot(b);
  if (aa == 0.0 || bb == 0.0) throw std::invalid_argument("cosine_similarity: zero-norm input");
  return a.dot(b) / std::sqrt(aa * bb);
}

inline double cosine_margin_loss(const Eigen::VectorXd& phi_q, const Eigen::VectorXd& phi_d, int y,
                                 double alpha_cos) {
  const double c = cosine_similarity(phi_q, phi_d);
  if (y == 1) return 1.0 - c;
  if (y == -1) return std::max(0.0, c - alpha_cos);
  throw std::invalid_argument("cosine_margin_loss: y must be +1 or -1");
}

inline double cosine_margin_loss(const PairSample& s, double alpha_cos) {
  return cosine_margin_loss(s.phi_q, s.phi_d, s.y, alpha_cos);
}

// Softmax class probabilities of an embedding under the shared classifier.
inline Eigen::VectorXd classify_semantic(const Eigen::VectorXd& phi, const Eigen::MatrixXd& w,
                                         const Eigen::RowVectorXd& b) {
  if (phi.size() != w.rows()) throw std::invalid_argument("classify_semantic: shape mismatch");
  Eigen::RowVectorXd logits = phi.transpose() * w + b;
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp().transpose();
  return p / p.sum();
}

inline double cross_entropy(const Eigen::VectorXd& phi, const Eigen::MatrixXd& w,
                            const Eigen::RowVectorXd& b, int target) {
  if (target < 0 || target >= w.cols())
    throw std::invalid_argument("cross_entropy: class id out of range");
  Eigen::RowVectorXd logits = phi.transpose() * w + b;
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits(target);
}

inline double regularized_loss(const PairSample& s, const Eigen::MatrixXd& clf_w,
                               const Eigen::RowVectorXd& clf_b, const LossConfig& cfg) {
  double loss = cosine_margin_loss(s, cfg.alpha_cos);
  if (cfg.lambda != 0.0)
    loss += cfg.lambda *
            (cross_entropy(s.phi_q, clf_w, clf_b, s.c_r) + cross_entropy(s.phi_d, clf_w, clf_b, s.c_v));
  return loss;
}

inline double triplet_loss(const TripletSample& t, const LossConfig& cfg) {
  const auto hinge = [&](const Eigen::VectorXd& pos, const Eigen::VectorXd& neg) {
    return std::max(0.0, cfg.alpha_tri - cosine_similarity(t.phi_q, pos) +
                             cosine_similarity(t.phi_q, neg));
  };
  const double l_samp = hinge(t.phi_d_pos, t.phi_d_neg);
  const double l_sem = hinge(t.phi_sem_pos, t.phi_sem_neg);
  const auto blend = [&](double l) { return cfg.beta * l * l + (1.0 - cfg.beta) * l; };
  return blend(l_samp) + cfg.gamma * blend(l_sem);
}

// ---- graph builders; identical formulas over tape variables ----

template <typename S>
Var<S> cosine_margin_loss(const Var<S>& phi_q, const Var<S>& phi_d, int y, double alpha_cos) {
  auto c = ad::cosine(phi_q, phi_d);
  if (y == 1) return ad::affine(c, -1.0, 1.0);
  if (y == -1) return ad::relu(ad::affine(c, 1.0, -alpha_cos));
  throw std::invalid_argument("cosine_margin_loss: y must be +1 or -1");
}

template <typename S>
Var<S> class_logits(const Var<S>& phi, const model::ClassifierParams<S>& clf) {
  return ad::add_rowvec(ad::matmul(phi, clf.w), clf.b);
}

template <typename S>
Var<S> regularized_loss(const Var<S>& phi_q, const Var<S>& phi_d, int y, int c_r, int c_v,
                        const model::ClassifierParams<S>& clf, const LossConfig& cfg) {
  auto loss = cosine_margin_loss(phi_q, phi_d, y, cfg.alpha_cos);
  if (cfg.lambda != 0.0) {
    auto ce = ad::add(ad::softmax_xent(class_logits(phi_q, clf), c_r),
                      ad::softmax_xent(class_logits(phi_d, clf), c_v));
    loss = ad::add(loss, ad::scale(ce, cfg.lambda));
  }
  return loss;
}

template <typename S>
Var<S> triplet_loss(const Var<S>& phi_q, const Var<S>& d_pos, const Var<S>& d_neg,
                    const Var<S>& sem_pos, const Var<S>& sem_neg, const LossConfig& cfg) {
  const auto hinge = [&](const Var<S>& pos, const Var<S>& neg) {
    auto gap = ad::add(ad::affine(ad::cosine(phi_q, pos), -1.0, cfg.alpha_tri),
                       ad::cosine(phi_q, neg));
    return ad::relu(gap);
  };
  const auto blend = [&](const Var<S>& l) {
    return ad::add(ad::scale(ad::cmul(l, l), cfg.beta), ad::scale(l, 1.0 - cfg.beta));
  };
  auto l_samp = hinge(d_pos, d_neg);
  auto l_sem = hinge(sem_pos, sem_neg);
  return ad::add(blend(l_samp), ad::scale(blend(l_sem), cfg.gamma));
}

}  // namespace recembed::objectives
