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
#include <vector>

#include "svlb/vit/config.hpp"
#include "svlb/vit/transformer.hpp"

namespace svlb::vit {

// Fixed 2-D sin-cos table [grid_h * grid_w, dim]. The first dim/2 columns
// encode the row coordinate, the rest the column coordinate; each half is
// [sin(p * w_k) | cos(p * w_k)] with w_k = 10000^(-k / (dim / 4)).
// dim must be a multiple of 4.
template <typename T>
Tensor<T> sincos_pos_embed(std::size_t grid_h, std::size_t grid_w, std::size_t dim);

// Patch embedding, fixed positional table and a parallel-block encoder. No
// class token.
template <typename T>
class Backbone {
 public:
  Backbone() = default;
  Backbone(const BackboneConfig& cfg, const Rng& rng);

  const BackboneConfig& config() const { return cfg_; }

  // Linear projection of raw patches [N, patch_dim] plus the positional
  // table (no positional term when pos is empty).
  Tensor<T> embed_patches(const Tensor<T>& patches, const Tensor<T>& pos) const;
  // patchify + embed_patches with this model's table; image [C, image, image].
  Tensor<T> embed(const Tensor<T>& image) const;

  // tokens [N, hidden] with N <= grid^2, already embedded.
  Tensor<T> forward(const Tensor<T>& tokens) const;
  ForwardResult<T> run(const Tensor<T>& tokens, const ForwardOptions& options) const;

  Tensor<T>& patch_weight() { return patch_weight_; }
  Tensor<T>& patch_bias() { return patch_bias_; }
  const Tensor<T>& pos_embed() const { return pos_; }
  TransformerStack<T>& encoder() { return encoder_; }
  const TransformerStack<T>& encoder() const { return encoder_; }

  // Trainable tensors, in a stable order.
  NamedTensors<T> parameters() const;
  // Non-trainable state (the positional table).
  NamedTensors<T> buffers() const;

 private:
  BackboneConfig cfg_;
  Tensor<T> patch_weight_, patch_bias_;
  Tensor<T> pos_;
  TransformerStack<T> encoder_;
};

}  // namespace svlb::vit
