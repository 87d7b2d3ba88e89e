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
#include <string>
#include <vector>

#include "svlb/rng.hpp"
#include "svlb/tensor/ops.hpp"

namespace svlb::vit {

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

template <typename T>
using NamedTensors = std::vector<NamedTensor<T>>;

template <typename T>
struct LayerNormParams {
  Tensor<T> gamma;
  Tensor<T> beta;

  static LayerNormParams create(std::size_t width);
  Tensor<T> operator()(const Tensor<T>& x) const { return ops::layer_norm(x, gamma, beta); }
};

// One attention branch and one MLP branch of a parallel block. Weights are
// stored [in, out].
template <typename T>
struct Branch {
  LayerNormParams<T> attn_norm;
  Tensor<T> qkv_weight, qkv_bias;
  Tensor<T> proj_weight, proj_bias;
  LayerNormParams<T> mlp_norm;
  Tensor<T> fc1_weight, fc1_bias;
  Tensor<T> fc2_weight, fc2_bias;

  // proj(MHSA(LN(x)))
  Tensor<T> attend(const Tensor<T>& x, std::size_t heads, const ops::TokenGroups& groups) const;
  // fc2(GELU(fc1(LN'(x))))
  Tensor<T> feed_forward(const Tensor<T>& x) const;
};

template <typename T>
struct ParallelBlock {
  std::vector<Branch<T>> branches;
};

struct StackConfig {
  std::size_t hidden = 0;
  std::size_t mlp = 0;
  std::size_t heads = 1;
  std::size_t layers = 1;
  std::size_t parallelism = 1;
};

// Multiplier for one residual branch output (stage 0 = attention,
// stage 1 = MLP, layer is 0-based). Zero drops the branch entirely.
using BranchScale = std::function<double(std::size_t layer, std::size_t stage, std::size_t branch)>;

struct ForwardOptions {
  // Token groups per layer (0-based); empty means global attention in
  // every layer.
  std::vector<ops::TokenGroups> groups;
  BranchScale branch_scale;
  // 1-based layer indices whose raw outputs (before the final norm) are
  // returned as taps.
  std::vector<std::size_t> taps;
};

template <typename T>
struct ForwardResult {
  Tensor<T> output;
  std::vector<Tensor<T>> taps;
};

// `layers` parallel blocks followed by a final LayerNorm. Each block:
//   x <- x + sum_i MHSA_i(LN_i(x))
//   x <- x + sum_i MLP_i(LN'_i(x))
template <typename T>
class TransformerStack {
 public:
  TransformerStack() = default;
  // Each tensor is initialised from rng.split(<prefixed name>), so values do
  // not depend on construction order.
  TransformerStack(const StackConfig& cfg, const Rng& rng, const std::string& prefix);

  const StackConfig& config() const { return cfg_; }
  std::vector<ParallelBlock<T>>& blocks() { return blocks_; }
  const std::vector<ParallelBlock<T>>& blocks() const { return blocks_; }
  LayerNormParams<T>& final_norm() { return norm_; }
  const LayerNormParams<T>& final_norm() const { return norm_; }

  ForwardResult<T> run(const Tensor<T>& x, const ForwardOptions& options = {}) const;

  void collect(NamedTensors<T>& out) const;

 private:
  StackConfig cfg_;
  std::string prefix_;
  std::vector<ParallelBlock<T>> blocks_;
  LayerNormParams<T> norm_;
};

// Plain pre-norm ViT (one branch per block) evaluated layer by layer. Only
// defined for parallelism 1.
template <typename T>
Tensor<T> serial_reference_forward(const TransformerStack<T>& stack, const Tensor<T>& x);

// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
Tensor<T> xavier_uniform(std::size_t fan_in, std::size_t fan_out, const Rng& rng);

}  // namespace svlb::vit
