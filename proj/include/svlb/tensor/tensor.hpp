// Copyright 2026 The SVLB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "svlb/rng.hpp"

namespace svlb {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape) noexcept;
std::string to_string(const Shape& shape);

// Disables graph construction on the current thread while alive. Ops still
// compute values; results never require grad.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool grad_enabled() noexcept;

 private:
  bool previous_;
};

// Dense row-major tensor handle. Copies share the underlying buffer; use
// clone() or detach() for a value copy.
//
// Every op result whose inputs require grad records a backward closure and
// its parents. backward() on a scalar walks that graph once in reverse
// topological order, accumulates into leaf grads, then drops the recorded
// closures so the graph cannot be replayed.
template <typename T>
class Tensor {
 public:
  struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;
    bool requires_grad = false;
    bool consumed = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads self.grad and accumulates into parents that require grad.
    std::function<void(Node& self)> backward;

    std::vector<T>& ensure_grad() {
      if (grad.size() != data.size()) grad.assign(data.size(), T(0));
      return grad;
    }
  };
  using NodePtr = std::shared_ptr<Node>;

  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);
  static Tensor randn(Shape shape, Rng& rng, T stddev = T(1), bool requires_grad = false);
  static Tensor uniform(Shape shape, Rng& rng, T lo, T hi, bool requires_grad = false);

  bool defined() const noexcept { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  T item() const;
  T at(std::initializer_list<std::size_t> index) const;

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool on = true);
  bool is_leaf() const { return !node_->backward; }

  bool has_grad() const { return node_->grad.size() == node_->data.size(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->ensure_grad(); }
  void zero_grad();

  // Value copy detached from any graph.
  Tensor detach() const;
  Tensor clone() const { return detach(); }

  // Reverse-mode sweep from this scalar. Throws ContractError for
  // non-scalar tensors or an already consumed graph.
  void backward() const;

  bool all_finite() const;

  const NodePtr& node() const { return node_; }

  // Builds an op result. `backward` is kept only if some parent requires
  // grad and grad mode is enabled.
  static Tensor make_result(Shape shape, std::vector<T> data, std::vector<Tensor> parents,
                            std::function<void(Node&)> backward);

 private:
  explicit Tensor(NodePtr node) : node_(std::move(node)) {}
  NodePtr node_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

extern template class Tensor<float>;
extern template class Tensor<double>;

// Converts between precisions (value copy, new leaf).
template <typename To, typename From>
Tensor<To> cast(const Tensor<From>& x, bool requires_grad = false) {
  std::vector<To> v(x.data().begin(), x.data().end());
  return Tensor<To>(x.shape(), std::move(v), requires_grad);
}

}  // namespace svlb
