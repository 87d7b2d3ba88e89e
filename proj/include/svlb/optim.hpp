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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "svlb/vit/transformer.hpp"

namespace svlb::optim {

// batch * base_lr / 256
double effective_lr(std::uint64_t batch, double base_lr);

struct AdamWOptions {
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::uint64_t step = 0;
};

// One decoupled-decay AdamW update:
//   p <- p (1 - lr wd)
//   p <- p - lr mhat / (sqrt(vhat) + eps)
// Moments are allocated on first use. Throws ContractError on size
// mismatch.
template <typename T>
void adamw_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state, const AdamWOptions& options);

// AdamW over a named parameter list. Each tensor's LR is
// lr * lr_scale(name); tensors with rank < 2 (biases, norms, tokens) are
// excluded from weight decay.
template <typename T>
class AdamW {
 public:
  using Scale = std::function<double(const std::string& name)>;

  AdamW(vit::NamedTensors<T> params, AdamWOptions options, Scale lr_scale = {});

  // Applies one update at the given LR. Tensors without a grad are skipped.
  void step(double lr);
  void zero_grad();

  const AdamWOptions& options() const { return options_; }
  const vit::NamedTensors<T>& params() const { return params_; }
  const std::vector<AdamState<T>>& states() const { return states_; }

 private:
  vit::NamedTensors<T> params_;
  AdamWOptions options_;
  std::vector<double> scales_;
  std::vector<AdamState<T>> states_;
};

// Linear warmup from 0 over `warmup` steps, then cosine decay to 0 at
// `total`.
double warmup_cosine(double step, double total, double warmup, double peak);

}  // namespace svlb::optim
