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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "svlb/vit/transformer.hpp"

namespace svlb::vitdet {

enum class Task { kDetection, kSegmentation };

Task parse_task(const std::string& name);
const char* to_string(Task task);

// Resampling stack of one pyramid level, channel-major maps [C, H, W].
//   kind 1: convT(C -> C/2), per-channel norm, GELU, convT(C/2 -> C/4)  x4
//   kind 2: convT(C -> C/2)                                             x2
//   kind 3: identity                                                    x1
//   kind 4: 2x2 max pool, odd sides zero padded                         x0.5
template <typename T>
class ScaleBlock {
 public:
  ScaleBlock() = default;
  ScaleBlock(int kind, std::size_t channels, const Rng& rng, const std::string& prefix);

  int kind() const { return kind_; }
  std::size_t out_channels() const;
  Tensor<T> operator()(const Tensor<T>& x) const;
  void collect(vit::NamedTensors<T>& out) const;

 private:
  int kind_ = 3;
  std::size_t channels_ = 0;
  std::string prefix_;
  Tensor<T> up1_weight_, up1_bias_, norm_gamma_, norm_beta_, up2_weight_, up2_bias_;
};

// Stand-alone scale block application with freshly initialised weights.
template <typename T>
Tensor<T> scale_block(int kind, const Tensor<T>& x, const Rng& rng);

// Levels at ratios 4, 2, 1, 0.5 of the patch grid, each `width` channels.
template <typename T>
struct FeaturePyramid {
  std::array<Tensor<T>, 4> levels;  // p4, p2, p1, p05

  const Tensor<T>& p4() const { return levels[0]; }
  const Tensor<T>& p2() const { return levels[1]; }
  const Tensor<T>& p1() const { return levels[2]; }
  const Tensor<T>& p05() const { return levels[3]; }
};

// Four scale blocks, each followed by a 1x1 projection to `width`.
template <typename T>
class SimplePyramid {
 public:
  SimplePyramid() = default;
  SimplePyramid(std::size_t hidden, std::size_t width, const Rng& rng);

  std::size_t width() const { return width_; }

  // taps: outputs after layers 3, 6, 9, 12 as tokens [g*g, hidden].
  // Detection feeds layer 12 to every level; segmentation feeds tap i to
  // level i. Throws ContractError when a needed tap is missing.
  FeaturePyramid<T> build(Task task, const std::vector<Tensor<T>>& taps, std::size_t grid) const;

  vit::NamedTensors<T> parameters() const;

 private:
  std::size_t hidden_ = 0, width_ = 0;
  std::array<ScaleBlock<T>, 4> blocks_;
  std::array<Tensor<T>, 4> proj_weight_, proj_bias_;
};

}  // namespace svlb::vitdet
