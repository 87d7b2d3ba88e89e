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

#include "svlb/vitdet/pyramid.hpp"

namespace svlb::vitdet {

struct FinetuneSchedule {
  Task task = Task::kDetection;
  double lr = 1e-4;
  double weight_decay = 0.05;
  double layer_decay = 0.8;
  double drop_path = 0.1;
  // Detection: epochs and the 1-based epochs after which LR drops x10.
  std::size_t epochs = 12;
  std::vector<std::size_t> decay_epochs{8, 11};
  // Segmentation: poly decay over `iterations` after a linear warmup.
  std::size_t iterations = 160000;
  std::size_t warmup_iters = 0;
  double warmup_ratio = 1.0;
  double poly_power = 1.0;
  double min_lr = 0.0;

  static FinetuneSchedule detection();
  static FinetuneSchedule segmentation(std::size_t iterations = 160000);

  // LR for 0-based epoch e: lr * 0.1^(number of decay epochs <= e).
  double detection_lr(std::size_t epoch) const;
  // LR at 0-based iteration it:
  //   regular = (lr - min_lr) (1 - it / iterations)^power + min_lr
  //   it < warmup: regular * (1 - (1 - warmup_ratio)(1 - it / warmup))
  double segmentation_lr(std::size_t iteration) const;
};

}  // namespace svlb::vitdet
