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
#include <set>
#include <string>
#include <vector>

#include "svlb/metrics/segmentation.hpp"
#include "svlb/vitdet/adapter.hpp"
#include "svlb/vitdet/pyramid.hpp"
#include "svlb/vitdet/schedule.hpp"

namespace svlb::heads {

// Fusion head: every pyramid level is nearest-upsampled to the p4 grid,
// the levels are summed and a 1x1 classifier gives [num_classes, 4g, 4g].
template <typename T>
class SegHead {
 public:
  SegHead() = default;
  SegHead(std::size_t width, int num_classes, const Rng& rng);

  int num_classes() const { return num_classes_; }
  Tensor<T> operator()(const vitdet::FeaturePyramid<T>& pyramid) const;

  Tensor<T>& classifier_weight() { return weight_; }
  Tensor<T>& classifier_bias() { return bias_; }
  vit::NamedTensors<T> parameters() const;

 private:
  int num_classes_ = 0;
  Tensor<T> weight_, bias_;
};

struct SegModelConfig {
  vit::BackboneConfig backbone;
  vitdet::AttentionSchedule attention;
  std::size_t pyramid_width = 256;
  int num_classes = 2;

  // Throws ContractError for an unusable combination.
  void validate() const;
};

// Adapted backbone + segmentation pyramid + fusion head.
template <typename T>
class SegModel {
 public:
  SegModel() = default;
  SegModel(const SegModelConfig& cfg, const Rng& rng);

  const SegModelConfig& config() const { return cfg_; }
  vit::Backbone<T>& backbone() { return backbone_; }
  const vit::Backbone<T>& backbone() const { return backbone_; }

  // image [C, S, S] with S a multiple of the patch size -> logits
  // [num_classes, S, S] (p4 logits nearest-upsampled by patch / 4).
  Tensor<T> logits(const Tensor<T>& image, const vit::BranchScale& branch_scale = {}) const;
  metrics::SegMap predict(const Tensor<T>& image) const;

  // Backbone, then "pyramid.*", then "head.*".
  vit::NamedTensors<T> parameters() const;
  vit::NamedTensors<T> buffers() const { return backbone_.buffers(); }

 private:
  SegModelConfig cfg_;
  vit::Backbone<T> backbone_;
  vitdet::SimplePyramid<T> pyramid_;
  SegHead<T> head_;
};

// Per-pixel argmax over [K, H, W] logits; ties take the lower class.
template <typename T>
metrics::SegMap argmax_map(const Tensor<T>& logits);

struct SegSample {
  TensorF image;
  metrics::SegMap mask;
};

struct FinetuneOptions {
  std::size_t batch = 2;
  std::function<void(std::size_t iteration, double loss)> on_iteration;
};

struct FinetuneResult {
  std::vector<double> iteration_loss;  // batch mean per iteration
};

// AdamW with layer-wise LR decay over schedule.iterations steps of the
// warmup + poly schedule, drop path on every branch. Streams (labels on
// rng): "order"/epoch, "drop_path"/iteration/slot. Throws DivergenceError
// on a non-finite loss.
FinetuneResult finetune_segmentation(SegModel<float>& model, const vitdet::FinetuneSchedule& schedule,
                                     const std::vector<SegSample>& data, const Rng& rng,
                                     const FinetuneOptions& options = {});

// Accumulates a confusion matrix over the samples (parallel over
// `threads`, 0 reads SVLB_THREADS) and reduces it.
metrics::SegReport evaluate_segmentation(const SegModel<float>& model, const std::vector<SegSample>& data,
                                         const std::set<int>& exclude = {}, std::size_t threads = 0);

// "iteration,loss" header then one row per iteration (1-based).
std::string iteration_loss_csv(const std::vector<double>& loss);

}  // namespace svlb::heads
