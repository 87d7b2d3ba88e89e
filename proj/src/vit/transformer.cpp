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

#include "svlb/vit/transformer.hpp"

#include <algorithm>
#include <cmath>

#include "svlb/error.hpp"

namespace svlb::vit {

template <typename T>
LayerNormParams<T> LayerNormParams<T>::create(std::size_t width) {
  return {Tensor<T>::full({width}, T(1), true), Tensor<T>({width}, true)};
}

template <typename T>
Tensor<T> xavier_uniform(std::size_t fan_in, std::size_t fan_out, const Rng& rng) {
  Rng local = rng;
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return Tensor<T>::uniform({fan_in, fan_out}, local, T(-a), T(a), true);
}

template <typename T>
Tensor<T> Branch<T>::attend(const Tensor<T>& x, std::size_t heads, const ops::TokenGroups& groups) const {
  auto qkv = ops::linear(attn_norm(x), qkv_weight, qkv_bias);
  return ops::linear(ops::attention(qkv, heads, groups), proj_weight, proj_bias);
}

template <typename T>
Tensor<T> Branch<T>::feed_forward(const Tensor<T>& x) const {
  return ops::linear(ops::gelu(ops::linear(mlp_norm(x), fc1_weight, fc1_bias)), fc2_weight, fc2_bias);
}

template <typename T>
TransformerStack<T>::TransformerStack(const StackConfig& cfg, const Rng& rng, const std::string& prefix)
    : cfg_(cfg), prefix_(prefix) {
  if (cfg.hidden == 0 || cfg.heads == 0 || cfg.hidden % cfg.heads != 0 || cfg.mlp == 0 || cfg.parallelism == 0) {
    throw ContractError("invalid transformer stack shape");
  }
  const std::size_t h = cfg.hidden, m = cfg.mlp;
  blocks_.resize(cfg.layers);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    auto& block = blocks_[l];
    block.branches.resize(cfg.parallelism);
    for (std::size_t i = 0; i < cfg.parallelism; ++i) {
      const std::string base = prefix + "blocks." + std::to_string(l) + ".branches." + std::to_string(i) + ".";
      auto& b = block.branches[i];
      b.attn_norm = LayerNormParams<T>::create(h);
      b.qkv_weight = xavier_uniform<T>(h, 3 * h, rng.split(base + "qkv.weight"));
      b.qkv_bias = Tensor<T>({3 * h}, true);
      b.proj_weight = xavier_uniform<T>(h, h, rng.split(base + "proj.weight"));
      b.proj_bias = Tensor<T>({h}, true);
      b.mlp_norm = LayerNormParams<T>::create(h);
      b.fc1_weight = xavier_uniform<T>(h, m, rng.split(base + "fc1.weight"));
      b.fc1_bias = Tensor<T>({m}, true);
      b.fc2_weight = xavier_uniform<T>(m, h, rng.split(base + "fc2.weight"));
      b.fc2_bias = Tensor<T>({h}, true);
    }
  }
  norm_ = LayerNormParams<T>::create(h);
}

template <typename T>
ForwardResult<T> TransformerStack<T>::run(const Tensor<T>& input, const ForwardOptions& options) const {
  if (input.rank() != 2 || input.dim(1) != cfg_.hidden) {
    throw DimensionError("transformer: token dim " + to_string(input.shape()) + " vs hidden " +
                         std::to_string(cfg_.hidden));
  }
  if (!options.groups.empty() && options.groups.size() != blocks_.size()) {
    throw ContractError("transformer: " + std::to_string(options.groups.size()) + " group lists for " +
                        std::to_string(blocks_.size()) + " layers");
  }
  const auto global = ops::single_group(input.dim(0));
  ForwardResult<T> result;
  Tensor<T> x = input;

  auto scale_of = [&](std::size_t l, std::size_t stage, std::size_t i) {
    return options.branch_scale ? options.branch_scale(l, stage, i) : 1.0;
  };
  // Sums the kept branches in index order; an empty result means every
  // branch was dropped.
  auto residual = [&](std::size_t l, std::size_t stage, auto&& branch_fn) {
    Tensor<T> acc;
    const auto& branches = blocks_[l].branches;
    for (std::size_t i = 0; i < branches.size(); ++i) {
      const double s = scale_of(l, stage, i);
      if (s == 0.0) continue;
      auto out = branch_fn(branches[i]);
      if (s != 1.0) out = ops::scale(out, static_cast<T>(s));
      acc = acc.defined() ? ops::add(acc, out) : out;
    }
    return acc;
  };

  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto& groups = options.groups.empty() ? global : options.groups[l];
    auto attn = residual(l, 0, [&](const Branch<T>& b) { return b.attend(x, cfg_.heads, groups); });
    if (attn.defined()) x = ops::add(x, attn);
    auto mlp = residual(l, 1, [&](const Branch<T>& b) { return b.feed_forward(x); });
    if (mlp.defined()) x = ops::add(x, mlp);
    if (std::find(options.taps.begin(), options.taps.end(), l + 1) != options.taps.end()) {
      result.taps.push_back(x);
    }
  }
  if (result.taps.size() != options.taps.size()) {
    throw ContractError("transformer: requested tap outside 1.." + std::to_string(blocks_.size()));
  }
  result.output = norm_(x);
  return result;
}

template <typename T>
void TransformerStack<T>::collect(NamedTensors<T>& out) const {
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    for (std::size_t i = 0; i < blocks_[l].branches.size(); ++i) {
      const std::string base = prefix_ + "blocks." + std::to_string(l) + ".branches." + std::to_string(i) + ".";
      const auto& b = blocks_[l].branches[i];
      out.push_back({base + "attn_norm.gamma", b.attn_norm.gamma});
      out.push_back({base + "attn_norm.beta", b.attn_norm.beta});
      out.push_back({base + "qkv.weight", b.qkv_weight});
      out.push_back({base + "qkv.bias", b.qkv_bias});
      out.push_back({base + "proj.weight", b.proj_weight});
      out.push_back({base + "proj.bias", b.proj_bias});
      out.push_back({base + "mlp_norm.gamma", b.mlp_norm.gamma});
      out.push_back({base + "mlp_norm.beta", b.mlp_norm.beta});
      out.push_back({base + "fc1.weight", b.fc1_weight});
      out.push_back({base + "fc1.bias", b.fc1_bias});
      out.push_back({base + "fc2.weight", b.fc2_weight});
      out.push_back({base + "fc2.bias", b.fc2_bias});
    }
  }
  out.push_back({prefix_ + "norm.gamma", norm_.gamma});
  out.push_back({prefix_ + "norm.beta", norm_.beta});
}

template <typename T>
Tensor<T> serial_reference_forward(const TransformerStack<T>& stack, const Tensor<T>& x) {
  if (stack.config().parallelism != 1) throw ContractError("serial reference needs parallelism 1");
  const auto groups = ops::single_group(x.dim(0));
  Tensor<T> h = x;
  for (const auto& block : stack.blocks()) {
    const auto& b = block.branches.front();
    auto a = ops::layer_norm(h, b.attn_norm.gamma, b.attn_norm.beta);
    a = ops::linear(a, b.qkv_weight, b.qkv_bias);
    a = ops::linear(ops::attention(a, stack.config().heads, groups), b.proj_weight, b.proj_bias);
    h = ops::add(h, a);
    auto f = ops::layer_norm(h, b.mlp_norm.gamma, b.mlp_norm.beta);
    f = ops::linear(ops::gelu(ops::linear(f, b.fc1_weight, b.fc1_bias)), b.fc2_weight, b.fc2_bias);
    h = ops::add(h, f);
  }
  return ops::layer_norm(h, stack.final_norm().gamma, stack.final_norm().beta);
}

template struct LayerNormParams<float>;
template struct LayerNormParams<double>;
template struct Branch<float>;
template struct Branch<double>;
template class TransformerStack<float>;
template class TransformerStack<double>;
template Tensor<float> serial_reference_forward(const TransformerStack<float>&, const Tensor<float>&);
template Tensor<double> serial_reference_forward(const TransformerStack<double>&, const Tensor<double>&);
template Tensor<float> xavier_uniform<float>(std::size_t, std::size_t, const Rng&);
template Tensor<double> xavier_uniform<double>(std::size_t, std::size_t, const Rng&);

}  // namespace svlb::vit
