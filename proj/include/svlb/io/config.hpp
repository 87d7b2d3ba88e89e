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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svlb/mae/pretrain.hpp"
#include "svlb/vit/config.hpp"

namespace svlb::io {

// Defaults match the default model.
struct PretrainSection {
  std::size_t epochs = 1600;
  double base_lr = 1.5e-4;
  double weight_decay = 0.05;
  std::size_t batch = 8;
  double mask_ratio = 0.75;
  std::size_t warmup_epochs = 80;
  std::size_t augment_side = 0;  // 0: the backbone image size
  bool augment_crop = true;

  bool operator==(const PretrainSection&) const = default;
};

struct AdaptSection {
  std::size_t window = 14;
  std::size_t pyramid_width = 256;
  int num_classes = 6;

  bool operator==(const AdaptSection&) const = default;
};

struct FinetuneSection {
  std::size_t iterations = 160000;
  double lr = 6e-5;
  double weight_decay = 0.01;
  double layer_decay = 0.8;
  double drop_path = 0.1;
  std::size_t warmup_iters = 1500;
  double warmup_ratio = 1e-6;
  double poly_power = 1.0;
  double min_lr = 0.0;
  std::size_t batch = 8;

  bool operator==(const FinetuneSection&) const = default;
};

struct EvalSection {
  std::size_t tile = 0;    // 0: the backbone image size
  std::size_t stride = 0;  // 0: three quarters of the tile
  std::vector<int> exclude;
  std::string detections;    // detection file; empty for segmentation
  std::string ground_truth;  // ground-truth box file
  double iou_thresh = 0.5;

  bool operator==(const EvalSection&) const = default;
};

// Synthetic data used when `dataset` is empty, plus the labelled fraction.
// Mask labels are class + 1, so the default five classes fill the six
// segmentation labels of `adapt.num_classes`.
struct DataSection {
  std::size_t count = 64;
  std::size_t size = 64;
  std::size_t num_objects = 3;
  int classes = 5;
  double subsample_ratio = 1.0;

  bool operator==(const DataSection&) const = default;
};

struct ExperimentConfig {
  std::string task = "pretrain";
  std::string model = "ViT-B12x1";
  // Replaces the named model's shape when present.
  std::optional<vit::BackboneConfig> backbone;
  vit::DecoderConfig decoder;
  std::uint64_t seed = 0;
  std::string dataset;  // directory written by `svlb synth`
  std::string output_dir = "svlb-out";
  std::string checkpoint;  // input checkpoint for adapt, finetune-seg, eval
  PretrainSection pretrain;
  AdaptSection adapt;
  FinetuneSection finetune;
  EvalSection eval;
  DataSection data;

  vit::BackboneConfig resolved_backbone() const;
  std::size_t eval_tile() const;
  std::size_t eval_stride() const;
  mae::PretrainSchedule pretrain_schedule() const;

  // Throws ContractError for values outside their documented ranges.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

const std::vector<std::string>& config_tasks();

// Strict JSON: unknown keys and wrong types throw ParseError naming the
// key path. Missing keys keep their defaults; pretrain defaults follow the
// model name. The result is validated.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// Every field, defaults included, as pretty-printed JSON.
std::string echo_config(const ExperimentConfig& config);

}  // namespace svlb::io
