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
#include <memory>
#include <vector>

#include "svlb/vit/backbone.hpp"

namespace svlb::vitdet {

// Which of the 12 layers (1-based) attend within windows and which attend
// globally.
struct AttentionSchedule {
  std::vector<std::size_t> local_blocks{1, 2, 4, 5, 7, 8, 10, 11};
  std::vector<std::size_t> global_blocks{3, 6, 9, 12};
  std::size_t window = 14;

  // Throws ContractError unless local and global partition 1..layers.
  void validate(std::size_t layers) const;
  bool is_global(std::size_t layer) const;
};

inline constexpr std::size_t kAdaptedDepth = 12;
inline constexpr std::size_t kTapLayers[4] = {3, 6, 9, 12};

// Bicubic (a = -0.75, half-pixel centres, edge clamped) resize of a square
// positional table [src_grid^2, dim] to [target_grid^2, dim]. Same size
// returns an exact copy.
template <typename T>
Tensor<T> interpolate_pos(const Tensor<T>& table, std::size_t src_grid, std::size_t target_grid);

struct PadMeta {
  std::size_t grid = 0;
  std::size_t window = 0;
  std::size_t padded = 0;       // grid rounded up to a multiple of window
  std::size_t per_side = 0;     // windows along one axis
  std::size_t count() const { return per_side * per_side; }
};

PadMeta window_pad_meta(std::size_t grid, std::size_t window);

// tokens [g*g, h] (row-major grid) -> windows [n, w*w, h] with zero padding
// on the bottom and right; windows ordered row-major.
template <typename T>
Tensor<T> window_partition(const Tensor<T>& tokens, const PadMeta& meta);

// Inverse of window_partition restricted to the unpadded grid.
template <typename T>
Tensor<T> window_unpartition(const Tensor<T>& windows, const PadMeta& meta);

// Token groups of the real (unpadded) tokens of each window. Padding never
// enters attention, so a window covering the whole grid is global
// attention.
ops::TokenGroups window_groups(const PadMeta& meta);

template <typename T>
struct AdaptedOutput {
  std::vector<Tensor<T>> taps;  // after layers 3, 6, 9, 12; [g*g, hidden]
  Tensor<T> output;             // final norm of layer 12
  std::size_t grid = 0;
};

// Patch-embeds image [C, S, S] with the positional table interpolated to
// S / patch.
template <typename T>
Tensor<T> adapted_embed(const vit::Backbone<T>& backbone, const Tensor<T>& image);

// Runs the 12-layer backbone with local attention on the schedule's local
// blocks. branch_scale carries drop path during training. Throws
// UnsupportedConfigError for other depths.
template <typename T>
AdaptedOutput<T> adapted_forward(const vit::Backbone<T>& backbone, const AttentionSchedule& schedule,
                                 const Tensor<T>& tokens, std::size_t grid, const vit::BranchScale& branch_scale = {});

// Training: keep with probability 1 - rate and scale by 1 / (1 - rate);
// evaluation or rate 0: identity.
template <typename T>
Tensor<T> drop_path(const Tensor<T>& x, double rate, bool training, Rng& rng);

// Per-branch drop path as a BranchScale: each call draws one keep decision
// from the shared stream.
vit::BranchScale drop_path_scales(double rate, const Rng& rng);

// base * decay^(num_layers - layer_index)
double layerwise_lr(double base, double decay, std::size_t layer_index, std::size_t num_layers);

// Layer index of a named tensor: patch embedding 0, encoder block l
// (0-based) l + 1, everything else (final norm, pyramid, head) num_layers.
std::size_t layer_index_of(const std::string& name, std::size_t num_layers);

}  // namespace svlb::vitdet
