#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

namespace recembed::ad {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;

// One eagerly evaluated node of the reverse-mode tape. `backprop` scatters
// the node's accumulated gradient into its parents.
template <typename Scalar>
struct Node {
  Mat<Scalar> value;
  Mat<Scalar> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;

  void ensure_grad() {
    if (grad.size() == 0) grad = Mat<Scalar>::Zero(value.rows(), value.cols());
  }
};

template <typename Scalar>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<Scalar>> n) : n_(std::move(n)) {}

  static Var constant(Mat<Scalar> v) {
    auto n = std::make_shared<Node<Scalar>>();
    n->value = std::move(v);
    return Var(std::move(n));
  }

  static Var param(Mat<Scalar> v) {
    auto n = std::make_shared<Node<Scalar>>();
    n->value = std::move(v);
    n->requires_grad = true;
    return Var(std::move(n));
  }

  bool defined() const { return n_ != nullptr; }
  const Mat<Scalar>& value() const { return n_->value; }
  Mat<Scalar>& value() { return n_->value; }
  Mat<Scalar>& grad() {
    n_->ensure_grad();
    return n_->grad;
  }
  bool requires_grad() const { return n_->requires_grad; }
  void zero_grad() {
    if (n_->grad.size() != 0) n_->grad.setZero();
  }
  Eigen::Index rows() const { return n_->value.rows(); }
  Eigen::Index cols() const { return n_->value.cols(); }
  Node<Scalar>* node() const { return n_.get(); }
  const std::shared_ptr<Node<Scalar>>& ptr() const { return n_; }

 private:
  std::shared_ptr<Node<Scalar>> n_;
};

// Reverse-topological sweep from a 1x1 root.
template <typename Scalar>
void backward(const Var<Scalar>& root) {
  if (root.rows() != 1 || root.cols() != 1)
    throw std::invalid_argument("backward: root must be a 1x1 scalar node");

  std::vector<Node<Scalar>*> order;
  std::unordered_set<Node<Scalar>*> seen;
  struct Frame {
    Node<Scalar>* n;
    std::size_t next;
  };
  std::vector<Frame> stack;
  stack.push_back({root.node(), 0});
  seen.insert(root.node());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next < f.n->parents.size()) {
      Node<Scalar>* p = f.n->parents[f.next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  root.node()->ensure_grad();
  root.node()->grad(0, 0) = Scalar(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<Scalar>* n = *it;
    if (n->backprop) {
      n->ensure_grad();
      n->backprop(*n);
    }
  }
}

}  // namespace recembed::ad
