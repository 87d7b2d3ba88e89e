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

#include "svlb/vitdet/pyramid.hpp"

#include <cmath>

#include "svlb/error.hpp"

namespace svlb::vitdet {

Task parse_task(const std::string& name) {
  if (name == "detection") return Task::kDetection;
  if (name == "segmentation") return Task::kSegmentation;
  throw ParseError("unknown task '" + name + "'");
}

const char* to_string(Task task) { return task == Task::kDetection ? "detection" : "segmentation"; }

namespace {

template <typename T>
Tensor<T> convt_weight(std::size_t cin, std::size_t cout, const Rng& rng) {
  Rng local = rng;
  const double a = std::sqrt(6.0 / static_cast<double>((cin + cout) * 4));
  return Tensor<T>::uniform({cin, cout, 2, 2}, local, T(-a), T(a), true);
}

}  // namespace

template <typename T>
ScaleBlock<T>::ScaleBlock(int kind, std::size_t channels, const Rng& rng, const std::string& prefix)
    : kind_(kind), channels_(channels), prefix_(prefix) {
  if (kind < 1 || kind > 4) throw ContractError("scale block kind " + std::to_string(kind) + " not in 1..4");
  if (kind == 1) {
    if (channels % 4 != 0) throw ContractError("scale block 1 needs channels divisible by 4");
    up1_weight_ = convt_weight<T>(channels, channels / 2, rng.split(prefix + "up1.weight"));
    up1_bias_ = Tensor<T>({channels / 2}, true);
    norm_gamma_ = Tensor<T>::full({channels / 2}, T(1), true);
    norm_beta_ = Tensor<T>({channels / 2}, true);
    up2_weight_ = convt_weight<T>(channels / 2, channels / 4, rng.split(prefix + "up2.weight"));
    up2_bias_ = Tensor<T>({channels / 4}, true);
  } else if (kind == 2) {
    if (channels % 2 != 0) throw ContractError("scale block 2 needs even channels");
    up1_weight_ = convt_weight<T>(channels, channels / 2, rng.split(prefix + "up1.weight"));
    up1_bias_ = Tensor<T>({channels / 2}, true);
  }
}

template <typename T>
std::size_t ScaleBlock<T>::out_channels() const {
  return kind_ == 1 ? channels_ / 4 : kind_ == 2 ? channels_ / 2 : channels_;
}

template <typename T>
Tensor<T> ScaleBlock<T>::operator()(const Tensor<T>& x) const {
  switch (kind_) {
    case 1: {
      auto y = ops::add_channel_bias(ops::conv_transpose2x2(x, up1_weight_), up1_bias_);
      y = ops::gelu(ops::instance_norm(y, norm_gamma_, norm_beta_));
      return ops::add_channel_bias(ops::conv_transpose2x2(y, up2_weight_), up2_bias_);
    }
    case 2:
      return ops::add_channel_bias(ops::conv_transpose2x2(x, up1_weight_), up1_bias_);
    case 3:
      return x;
    default:
      return ops::max_pool2d(x);
  }
}

template <typename T>
void ScaleBlock<T>::collect(vit::NamedTensors<T>& out) const {
  if (kind_ == 1 || kind_ == 2) {
    out.push_back({prefix_ + "up1.weight", up1_weight_});
    out.push_back({prefix_ + "up1.bias", up1_bias_});
  }
  if (kind_ == 1) {
    out.push_back({prefix_ + "norm.gamma", norm_gamma_});
    out.push_back({prefix_ + "norm.beta", norm_beta_});
    out.push_back({prefix_ + "up2.weight", up2_weight_});
    out.push_back({prefix_ + "up2.bias", up2_bias_});
  }
}

template <typename T>
Tensor<T> scale_block(int kind, const Tensor<T>& x, const Rng& rng) {
  if (x.rank() != 3) throw DimensionError("scale_block: expected [C,H,W], got " + svlb::to_string(x.shape()));
  return ScaleBlock<T>(kind, x.dim(0), rng, "scale_block.")(x);
}

template <typename T>
SimplePyramid<T>::SimplePyramid(std::size_t hidden, std::size_t width, const Rng& rng)
    : hidden_(hidden), width_(width) {
  if (width == 0) throw ContractError("pyramid width must be >= 1");
  for (int i = 0; i < 4; ++i) {
    const std::string prefix = "pyramid.levels." + std::to_string(i) + ".";
    blocks_[i] = ScaleBlock<T>(i + 1, hidden, rng, prefix);
    proj_weight_[i] = vit::xavier_uniform<T>(blocks_[i].out_channels(), width, rng.split(prefix + "proj.weight"));
    proj_bias_[i] = Tensor<T>({width}, true);
  }
}

template <typename T>
FeaturePyramid<T> SimplePyramid<T>::build(Task task, const std::vector<Tensor<T>>& taps, std::size_t grid) const {
  if (taps.size() != 4) {
    throw ContractError(std::string("pyramid: ") + to_string(task) + " needs taps after layers 3, 6, 9, 12; got " +
                        std::to_string(taps.size()));
  }
  FeaturePyramid<T> out;
  for (int i = 0; i < 4; ++i) {
    const auto& tap = task == Task::kDetection ? taps[3] : taps[i];
    if (!tap.defined()) throw ContractError("pyramid: missing tap " + std::to_string(i));
    auto map = ops::tokens_to_map(tap, grid, grid);
    out.levels[i] = ops::conv1x1(blocks_[i](map), proj_weight_[i], proj_bias_[i]);
  }
  return out;
}

template <typename T>
vit::NamedTensors<T> SimplePyramid<T>::parameters() const {
  vit::NamedTensors<T> out;
  for (int i = 0; i < 4; ++i) {
    blocks_[i].collect(out);
    const std::string prefix = "pyramid.levels." + std::to_string(i) + ".";
    out.push_back({prefix + "proj.weight", proj_weight_[i]});
    out.push_back({prefix + "proj.bias", proj_bias_[i]});
  }
  return out;
}

template class ScaleBlock<float>;
template class ScaleBlock<double>;
template class SimplePyramid<float>;
template class SimplePyramid<double>;
template Tensor<float> scale_block(int, const Tensor<float>&, const Rng&);
template Tensor<double> scale_block(int, const Tensor<double>&, const Rng&);

}  // namespace svlb::vitdet
