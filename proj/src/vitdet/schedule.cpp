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

#include "svlb/vitdet/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace svlb::vitdet {

FinetuneSchedule FinetuneSchedule::detection() { return {}; }

FinetuneSchedule FinetuneSchedule::segmentation(std::size_t iterations) {
  FinetuneSchedule s;
  s.task = Task::kSegmentation;
  s.lr = 6e-5;
  s.weight_decay = 0.01;
  s.epochs = 0;
  s.decay_epochs.clear();
  s.iterations = iterations;
  s.warmup_iters = 1500;
  s.warmup_ratio = 1e-6;
  return s;
}

double FinetuneSchedule::detection_lr(std::size_t epoch) const {
  const auto drops = std::count_if(decay_epochs.begin(), decay_epochs.end(), [&](std::size_t d) { return d <= epoch; });
  return lr * std::pow(0.1, static_cast<double>(drops));
}

double FinetuneSchedule::segmentation_lr(std::size_t iteration) const {
  const double progress = std::min(1.0, static_cast<double>(iteration) / static_cast<double>(iterations));
  const double regular = (lr - min_lr) * std::pow(1.0 - progress, poly_power) + min_lr;
  if (iteration >= warmup_iters) return regular;
  const double k = (1.0 - static_cast<double>(iteration) / static_cast<double>(warmup_iters)) * (1.0 - warmup_ratio);
  return regular * (1.0 - k);
}

}  // namespace svlb::vitdet
