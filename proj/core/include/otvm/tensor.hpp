#pragma once

#include <functional>
#include <memory>

#include "otvm/array.hpp"

namespace otvm::core {

// Reverse-mode autodiff over dense arrays. Every op builds a node holding
// the forward value and a closure that scatters the node's gradient into
// its parents. backward() runs the closures in reverse topological order.

template <typename T>
struct Node {
  ArrayT<T> value;
  ArrayT<T> grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  bool is_leaf = true;
  std::vector<std::shared_ptr<Node<T>>> parents;
  std::function<void()> backfn;

  void ensure_grad() {
    if (grad.shape != value.shape) grad = ArrayT<T>::zeros(value.shape);
  }
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor leaf(ArrayT<T> v, bool requires_grad = false) {
    Tensor t;
    t.n_ = std::make_shared<Node<T>>();
    t.n_->value = std::move(v);
    t.n_->requires_grad = requires_grad;
    return t;
  }
  static Tensor constant(ArrayT<T> v) { return leaf(std::move(v), false); }
  static Tensor from_node(std::shared_ptr<Node<T>> n) {
    Tensor t;
    t.n_ = std::move(n);
    return t;
  }

  bool defined() const { return (bool)n_; }
  const ArrayT<T>& val() const { return n_->value; }
  ArrayT<T>& val() { return n_->value; }
  const ArrayT<T>& grad() const { return n_->grad; }
  bool has_grad() const { return n_->grad.shape == n_->value.shape; }
  bool requires_grad() const { return n_ && n_->requires_grad; }
  void set_requires_grad(bool b) {
    assert(n_->is_leaf);
    n_->requires_grad = b;
  }
  void zero_grad() {
    if (n_ && n_->grad.numel()) n_->grad.fill(T(0));
  }
  const std::vector<int>& shape() const { return n_->value.shape; }
  int dim(int i) const { return n_->value.dim(i); }
  int64_t numel() const { return n_->value.numel(); }
  std::shared_ptr<Node<T>> node() const { return n_; }

 private:
  std::shared_ptr<Node<T>> n_;
};

// Runs the reverse sweep from a scalar (1-element) tensor.
template <typename T>
void backward(const Tensor<T>& loss);

// RAII guard that disables graph construction (inference mode).
struct GradMode {
  static bool enabled();
  static void set(bool);
};
struct NoGradGuard {
  NoGradGuard() : prev_(GradMode::enabled()) { GradMode::set(false); }
  ~NoGradGuard() { GradMode::set(prev_); }

 private:
  bool prev_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace otvm::core
