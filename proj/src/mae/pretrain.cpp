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

#include "svlb/mae/pretrain.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "svlb/error.hpp"
#include "svlb/optim.hpp"
#include "svlb/parallel.hpp"

namespace svlb::mae {

PretrainSchedule PretrainSchedule::defaults_for(const std::string& model_name) {
  PretrainSchedule s;
  if (model_name == "ViT-B12x1") s.epochs = 1600;
  if (model_name == "ViT-G12x4") s.base_lr = 1e-4;
  s.warmup_epochs = static_cast<std::size_t>(std::lround(0.05 * static_cast<double>(s.epochs)));
  return s;
}

PretrainResult pretrain(MaeModel<float>& model, const PretrainSchedule& schedule, const std::vector<TensorF>& dataset,
                        const Rng& rng, const PretrainOptions& options) {
  if (dataset.empty()) throw ContractError("pretrain: dataset is empty");
  if (schedule.batch == 0) throw ContractError("pretrain: batch must be >= 1");
  const std::size_t n = dataset.size();
  const std::size_t steps_per_epoch = (n + schedule.batch - 1) / schedule.batch;
  const double total_steps = static_cast<double>(schedule.epochs * steps_per_epoch);
  const double warmup_steps = static_cast<double>(schedule.warmup_epochs * steps_per_epoch);
  const double peak = optim::effective_lr(schedule.batch, schedule.base_lr);
  const std::size_t workers = options.threads ? options.threads : worker_count();
  const std::size_t patch = model.encoder.config().patch;
  const std::size_t total_tokens = model.encoder.config().tokens();

  optim::AdamW<float> opt(model.parameters(), {peak, schedule.weight_decay});
  const Rng order_rng = rng.split("order");
  const Rng augment_rng = rng.split("augment");
  const Rng mask_rng = rng.split("mask");

  PretrainResult result;
  for (std::size_t epoch = 0; epoch < schedule.epochs; ++epoch) {
    const auto order = order_rng.split(epoch).permutation(n);
    std::vector<TensorF> views(n);
    parallel_for(n, workers, [&](std::size_t slot) {
      Rng r = augment_rng.split(epoch).split(slot);
      views[slot] = augment(dataset[order[slot]], r, options.augment);
    });

    double epoch_sum = 0.0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const std::size_t begin = step * schedule.batch;
      const std::size_t end = std::min(n, begin + schedule.batch);
      const float inv = 1.0f / static_cast<float>(end - begin);
      bool any_backward = false;
      for (std::size_t slot = begin; slot < end; ++slot) {
        const auto& view = views[slot];
        const auto plan = make_mask_plan(total_tokens, schedule.mask_ratio, mask_rng.split(epoch).split(slot));
        auto out = mae_forward(model, model.encoder.embed(view), plan);
        auto loss = mae_loss(out.pred, view, plan, patch);
        if (loss.degenerate) {
          result.degenerate_loss = true;
          continue;
        }
        const double value = loss.value.item();
        if (!std::isfinite(value)) {
          throw DivergenceError("pretrain: non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                std::to_string(step + 1) + ", sample " + std::to_string(order[slot]));
        }
        epoch_sum += value;
        ops::scale(loss.value, inv).backward();
        any_backward = true;
      }
      if (any_backward) {
        const double it = static_cast<double>(epoch * steps_per_epoch + step);
        opt.step(optim::warmup_cosine(it, total_steps, warmup_steps, peak));
        opt.zero_grad();
      }
      ++result.steps;
    }
    const double mean = epoch_sum / static_cast<double>(n);
    result.epoch_loss.push_back(mean);
    if (options.on_epoch) options.on_epoch(epoch + 1, mean);
  }
  return result;
}

std::string loss_curve_csv(const std::vector<double>& epoch_loss) {
  std::ostringstream os;
  os << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, epoch_loss[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace svlb::mae
