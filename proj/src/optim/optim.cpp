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

#include "svlb/optim.hpp"

#include <cmath>
#include <numbers>

#include "svlb/error.hpp"

namespace svlb::optim {

double effective_lr(std::uint64_t batch, double base_lr) {
  if (batch == 0) throw ContractError("effective_lr: batch must be >= 1");
  return static_cast<double>(batch) * base_lr / 256.0;
}

template <typename T>
void adamw_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state, const AdamWOptions& o) {
  if (param.size() != grad.size()) {
    throw ContractError("adamw_step: " + std::to_string(param.size()) + " params vs " + std::to_string(grad.size()) +
                        " grads");
  }
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(param.size(), T(0));
    state.v.assign(param.size(), T(0));
  }
  if (state.m.size() != param.size() || state.v.size() != param.size()) {
    throw ContractError("adamw_step: optimizer state size does not match parameter");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  const double decay = 1.0 - o.lr * o.weight_decay;
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double m = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    const double v = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    double p = static_cast<double>(param[i]) * decay;
    p -= o.lr * (m / c1) / (std::sqrt(v / c2) + o.eps);
    param[i] = static_cast<T>(p);
  }
}

template <typename T>
AdamW<T>::AdamW(vit::NamedTensors<T> params, AdamWOptions options, Scale lr_scale)
    : params_(std::move(params)), options_(options), states_(params_.size()) {
  scales_.reserve(params_.size());
  for (const auto& p : params_) scales_.push_back(lr_scale ? lr_scale(p.name) : 1.0);
}

template <typename T>
void AdamW<T>::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& t = params_[i].tensor;
    if (!t.has_grad()) continue;
    AdamWOptions o = options_;
    o.lr = lr * scales_[i];
    if (t.rank() < 2) o.weight_decay = 0.0;
    adamw_step<T>(t.data(), t.grad(), states_[i], o);
  }
}

template <typename T>
void AdamW<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

double warmup_cosine(double step, double total, double warmup, double peak) {
  if (step < warmup) return peak * step / warmup;
  if (total <= warmup) return peak;
  const double progress = std::min(1.0, (step - warmup) / (total - warmup));
  return peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template void adamw_step<float>(std::span<float>, std::span<const float>, AdamState<float>&, const AdamWOptions&);
template void adamw_step<double>(std::span<double>, std::span<const double>, AdamState<double>&,
                                 const AdamWOptions&);
template class AdamW<float>;
template class AdamW<double>;

}  // namespace svlb::optim
