#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "recembed/ad/ops.hpp"
#include "recembed/model/params.hpp"

namespace recembed::model {

// Affine + tanh + unit normalization over a stored feature vector; the
// trainable stand-in for the CNN top layer.
template <typename S>
ad::Var<S> encode_image(const Eigen::VectorXd& feature, const ImageHeadParams<S>& params,
                        bool* degenerate = nullptr) {
  if (feature.size() != params.w.rows())
    throw std::invalid_argument("encode_image: feature dimension mismatch");
  Mat<S> row(1, feature.size());
  for (Eigen::Index i = 0; i < feature.size(); ++i) row(0, i) = S(feature(i));
  auto pre = ad::tanh_(ad::add_rowvec(ad::matmul(ad::Var<S>::constant(std::move(row)), params.w),
                                      params.b));
  if (degenerate) *degenerate = pre.value().norm() == S(0);
  return ad::l2_normalize_rows(pre);
}

}  // namespace recembed::model
