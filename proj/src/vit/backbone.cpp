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

#include "svlb/vit/backbone.hpp"

#include <cmath>

#include "svlb/error.hpp"

namespace svlb::vit {

template <typename T>
Tensor<T> sincos_pos_embed(std::size_t grid_h, std::size_t grid_w, std::size_t dim) {
  if (dim == 0 || dim % 4 != 0) throw ContractError("sincos_pos_embed: dim " + std::to_string(dim) + " % 4 != 0");
  const std::size_t quarter = dim / 4;
  std::vector<T> table(grid_h * grid_w * dim);
  for (std::size_t y = 0; y < grid_h; ++y) {
    for (std::size_t x = 0; x < grid_w; ++x) {
      T* row = table.data() + (y * grid_w + x) * dim;
      for (std::size_t k = 0; k < quarter; ++k) {
        const double omega = std::pow(10000.0, -static_cast<double>(k) / static_cast<double>(quarter));
        row[k] = static_cast<T>(std::sin(static_cast<double>(y) * omega));
        row[quarter + k] = static_cast<T>(std::cos(static_cast<double>(y) * omega));
        row[2 * quarter + k] = static_cast<T>(std::sin(static_cast<double>(x) * omega));
        row[3 * quarter + k] = static_cast<T>(std::cos(static_cast<double>(x) * omega));
      }
    }
  }
  return Tensor<T>({grid_h * grid_w, dim}, std::move(table));
}

template <typename T>
Backbone<T>::Backbone(const BackboneConfig& cfg, const Rng& rng) : cfg_(cfg) {
  cfg.validate();
  patch_weight_ = xavier_uniform<T>(cfg.patch_dim(), cfg.hidden, rng.split("patch_embed.weight"));
  patch_bias_ = Tensor<T>({cfg.hidden}, true);
  pos_ = sincos_pos_embed<T>(cfg.grid(), cfg.grid(), cfg.hidden);
  encoder_ = TransformerStack<T>({cfg.hidden, cfg.mlp, cfg.heads, cfg.layers, cfg.parallelism}, rng, "encoder.");
}

template <typename T>
Tensor<T> Backbone<T>::embed_patches(const Tensor<T>& patches, const Tensor<T>& pos) const {
  if (patches.rank() != 2 || patches.dim(1) != cfg_.patch_dim()) {
    throw DimensionError("embed: patches " + to_string(patches.shape()) + " vs patch dim " +
                         std::to_string(cfg_.patch_dim()));
  }
  auto tokens = ops::linear(patches, patch_weight_, patch_bias_);
  return pos.defined() ? ops::add(tokens, pos) : tokens;
}

template <typename T>
Tensor<T> Backbone<T>::embed(const Tensor<T>& image) const {
  return embed_patches(ops::patchify(image, cfg_.patch), pos_);
}

template <typename T>
Tensor<T> Backbone<T>::forward(const Tensor<T>& tokens) const {
  if (tokens.rank() == 2 && tokens.dim(0) > cfg_.tokens()) {
    throw DimensionError("forward: " + std::to_string(tokens.dim(0)) + " tokens exceed grid of " +
                         std::to_string(cfg_.tokens()));
  }
  return encoder_.run(tokens).output;
}

template <typename T>
ForwardResult<T> Backbone<T>::run(const Tensor<T>& tokens, const ForwardOptions& options) const {
  return encoder_.run(tokens, options);
}

template <typename T>
NamedTensors<T> Backbone<T>::parameters() const {
  NamedTensors<T> out{{"patch_embed.weight", patch_weight_}, {"patch_embed.bias", patch_bias_}};
  encoder_.collect(out);
  return out;
}

template <typename T>
NamedTensors<T> Backbone<T>::buffers() const {
  return {{"pos_embed", pos_}};
}

template Tensor<float> sincos_pos_embed<float>(std::size_t, std::size_t, std::size_t);
template Tensor<double> sincos_pos_embed<double>(std::size_t, std::size_t, std::size_t);
template class Backbone<float>;
template class Backbone<double>;

}  // namespace svlb::vit
