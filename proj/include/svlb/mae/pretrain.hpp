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

#include "svlb/mae/augment.hpp"
#include "svlb/mae/mae.hpp"

namespace svlb::mae {

struct PretrainSchedule {
  std::size_t epochs = 400;
  double base_lr = 1.5e-4;
  double weight_decay = 0.05;
  std::size_t batch = 8;
  double mask_ratio = 0.75;
  std::size_t warmup_epochs = 20;

  // Table defaults for a registered model name; unknown names get the
  // common row. Warmup is 5% of epochs.
  static PretrainSchedule defaults_for(const std::string& model_name);
};

struct PretrainOptions {
  AugmentOptions augment;
  // Augmentation workers; 0 reads SVLB_THREADS.
  std::size_t threads = 0;
  std::function<void(std::size_t epoch, double mean_loss)> on_epoch;
};

struct PretrainResult {
  std::vector<double> epoch_loss;
  std::size_t steps = 0;
  // Set when the mask ratio left nothing to reconstruct.
  bool degenerate_loss = false;
};

// Streams (labels on rng): "order"/epoch, "augment"/epoch/slot,
// "mask"/epoch/slot. Each step averages the per-sample losses of one batch
// before the AdamW update. Throws DivergenceError on a non-finite loss.
PretrainResult pretrain(MaeModel<float>& model, const PretrainSchedule& schedule, const std::vector<TensorF>& dataset,
                        const Rng& rng, const PretrainOptions& options = {});

// "epoch,mean_loss" header then one row per epoch (1-based).
std::string loss_curve_csv(const std::vector<double>& epoch_loss);

}  // namespace svlb::mae
