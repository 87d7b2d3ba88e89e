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
#include <cstdint>
#include <vector>

#include "svlb/vit/backbone.hpp"

namespace svlb::mae {

struct MaskPlan {
  std::size_t total = 0;
  std::vector<std::size_t> visible;  // sorted
  std::vector<std::size_t> masked;   // sorted
  std::uint64_t seed = 0;
};

// Masks round(total * ratio) tokens chosen uniformly without replacement
// (prefix of one permutation). ratio must lie in [0, 1).
MaskPlan make_mask_plan(std::size_t total, double ratio, const Rng& rng);

// Light decoder: encoder width -> decoder width, shared mask token, fixed
// sin-cos positions, single-branch blocks, per-patch pixel head.
template <typename T>
class MaeDecoder {
 public:
  MaeDecoder() = default;
  MaeDecoder(const vit::DecoderConfig& cfg, const vit::BackboneConfig& encoder, const Rng& rng);

  const vit::DecoderConfig& config() const { return cfg_; }

  // visible [Nv, enc_hidden] -> predictions [|plan.masked|, patch_dim].
  // `decoder_tokens` receives the restored sequence length.
  Tensor<T> forward(const Tensor<T>& visible, const MaskPlan& plan, std::size_t* decoder_tokens = nullptr) const;

  vit::NamedTensors<T> parameters() const;
  vit::NamedTensors<T> buffers() const;

 private:
  vit::DecoderConfig cfg_;
  Tensor<T> embed_weight_, embed_bias_, mask_token_, pos_;
  vit::TransformerStack<T> stack_;
  Tensor<T> pred_weight_, pred_bias_;
};

template <typename T>
struct MaeModel {
  vit::Backbone<T> encoder;
  MaeDecoder<T> decoder;

  MaeModel() = default;
  MaeModel(const vit::BackboneConfig& encoder_cfg, const vit::DecoderConfig& decoder_cfg, const Rng& rng);

  vit::NamedTensors<T> parameters() const;
  vit::NamedTensors<T> buffers() const;
};

template <typename T>
struct MaeOutput {
  Tensor<T> pred;  // undefined when nothing is masked
  std::size_t encoder_tokens = 0;
  std::size_t decoder_tokens = 0;
};

// tokens: embedded patches [total, hidden] (positions already added).
template <typename T>
MaeOutput<T> mae_forward(const MaeModel<T>& model, const Tensor<T>& tokens, const MaskPlan& plan);

template <typename T>
struct MaeLoss {
  Tensor<T> value;  // [1]
  // True when the plan masks nothing: value is 0 and carries no gradient.
  bool degenerate = false;
};

// Mean squared error between pred and the raw pixels of the masked patches
// of target_image [C,H,W]. Visible patches never enter the loss.
template <typename T>
MaeLoss<T> mae_loss(const Tensor<T>& pred, const Tensor<T>& target_image, const MaskPlan& plan, std::size_t patch);

}  // namespace svlb::mae
