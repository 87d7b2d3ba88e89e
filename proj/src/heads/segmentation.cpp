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

#include "svlb/heads/segmentation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "svlb/error.hpp"
#include "svlb/optim.hpp"
#include "svlb/parallel.hpp"

namespace svlb::heads {

template <typename T>
SegHead<T>::SegHead(std::size_t width, int num_classes, const Rng& rng) : num_classes_(num_classes) {
  if (num_classes < 1) throw ContractError("seg head: num_classes must be >= 1, got " + std::to_string(num_classes));
  if (width == 0) throw ContractError("seg head: width must be >= 1");
  const auto k = static_cast<std::size_t>(num_classes);
  weight_ = vit::xavier_uniform<T>(width, k, rng.split("head.classifier.weight"));
  bias_ = Tensor<T>({k}, true);
}

template <typename T>
Tensor<T> SegHead<T>::operator()(const vitdet::FeaturePyramid<T>& pyramid) const {
  const auto& p4 = pyramid.p4();
  const std::size_t h = p4.dim(1), w = p4.dim(2);
  Tensor<T> fused = p4;
  const std::size_t factors[4] = {1, 2, 4, 8};
  for (int i = 1; i < 4; ++i) {
    fused = ops::add(fused, ops::upsample_nearest(pyramid.levels[i], factors[i], h, w));
  }
  return ops::conv1x1(fused, weight_, bias_);
}

template <typename T>
vit::NamedTensors<T> SegHead<T>::parameters() const {
  return {{"head.classifier.weight", weight_}, {"head.classifier.bias", bias_}};
}

void SegModelConfig::validate() const {
  backbone.validate();
  if (backbone.layers != vitdet::kAdaptedDepth) {
    throw UnsupportedConfigError("seg model: adaptation needs a 12-layer backbone, got " +
                                 std::to_string(backbone.layers));
  }
  attention.validate(backbone.layers);
  if (backbone.patch % 4 != 0) throw ContractError("seg model: patch size must be a multiple of 4");
  if (num_classes < 1) throw ContractError("seg model: num_classes must be >= 1");
  if (pyramid_width == 0) throw ContractError("seg model: pyramid width must be >= 1");
}

template <typename T>
SegModel<T>::SegModel(const SegModelConfig& cfg, const Rng& rng)
    : cfg_((cfg.validate(), cfg)),
      backbone_(cfg.backbone, rng.split("backbone")),
      pyramid_(cfg.backbone.hidden, cfg.pyramid_width, rng.split("pyramid")),
      head_(cfg.pyramid_width, cfg.num_classes, rng.split("head")) {}

template <typename T>
Tensor<T> SegModel<T>::logits(const Tensor<T>& image, const vit::BranchScale& branch_scale) const {
  if (image.rank() != 3 || image.dim(1) != image.dim(2) || image.dim(1) % cfg_.backbone.patch != 0) {
    throw DimensionError("seg model: image " + to_string(image.shape()) + " must be square with side a multiple of " +
                         std::to_string(cfg_.backbone.patch));
  }
  const std::size_t side = image.dim(1);
  const std::size_t grid = side / cfg_.backbone.patch;
  auto tokens = vitdet::adapted_embed(backbone_, image);
  auto out = vitdet::adapted_forward(backbone_, cfg_.attention, tokens, grid, branch_scale);
  auto pyr = pyramid_.build(vitdet::Task::kSegmentation, out.taps, grid);
  auto logits = head_(pyr);
  const std::size_t factor = cfg_.backbone.patch / 4;
  if (factor == 1) return logits;
  return ops::upsample_nearest(logits, factor, side, side);
}

template <typename T>
metrics::SegMap argmax_map(const Tensor<T>& logits) {
  if (logits.rank() != 3) throw DimensionError("argmax_map: expected [K,H,W], got " + to_string(logits.shape()));
  const std::size_t k = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
  metrics::SegMap map(h, w);
  const auto d = logits.data();
  for (std::size_t p = 0; p < h * w; ++p) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < k; ++c) {
      if (d[c * h * w + p] > d[best * h * w + p]) best = c;
    }
    map.labels[p] = static_cast<std::int32_t>(best);
  }
  return map;
}

template <typename T>
metrics::SegMap SegModel<T>::predict(const Tensor<T>& image) const {
  NoGradGuard guard;
  return argmax_map(logits(image));
}

template <typename T>
vit::NamedTensors<T> SegModel<T>::parameters() const {
  auto out = backbone_.parameters();
  for (auto& p : pyramid_.parameters()) out.push_back(p);
  for (auto& p : head_.parameters()) out.push_back(p);
  return out;
}

template class SegHead<float>;
template class SegHead<double>;
template class SegModel<float>;
template class SegModel<double>;
template metrics::SegMap argmax_map(const Tensor<float>&);
template metrics::SegMap argmax_map(const Tensor<double>&);

namespace {

std::vector<int> label_vector(const metrics::SegMap& mask) {
  std::vector<int> out(mask.labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = mask.ignored(mask.labels[i]) ? -1 : mask.labels[i];
  return out;
}

}  // namespace

FinetuneResult finetune_segmentation(SegModel<float>& model, const vitdet::FinetuneSchedule& schedule,
                                     const std::vector<SegSample>& data, const Rng& rng,
                                     const FinetuneOptions& options) {
  if (data.empty()) throw ContractError("finetune: dataset is empty");
  if (options.batch == 0) throw ContractError("finetune: batch must be >= 1");
  if (schedule.iterations == 0) throw ContractError("finetune: iterations must be >= 1");
  const std::size_t layers = model.config().backbone.layers;
  const int k = model.config().num_classes;
  for (const auto& s : data) s.mask.validate(k);

  optim::AdamW<float> opt(model.parameters(), {schedule.lr, schedule.weight_decay}, [&](const std::string& name) {
    return vitdet::layerwise_lr(1.0, schedule.layer_decay, vitdet::layer_index_of(name, layers), layers);
  });
  const Rng order_rng = rng.split("order");
  const Rng drop_rng = rng.split("drop_path");
  const std::size_t n = data.size();
  const float inv = 1.0f / static_cast<float>(options.batch);

  FinetuneResult result;
  std::vector<std::size_t> order;
  std::size_t cursor = n, epoch = 0;
  for (std::size_t it = 0; it < schedule.iterations; ++it) {
    double sum = 0.0;
    for (std::size_t slot = 0; slot < options.batch; ++slot) {
      if (cursor == n) {
        order = order_rng.split(epoch++).permutation(n);
        cursor = 0;
      }
      const auto& sample = data[order[cursor++]];
      auto scales = vitdet::drop_path_scales(schedule.drop_path, drop_rng.split(it).split(slot));
      auto logits = model.logits(sample.image, scales);
      const std::size_t pixels = logits.dim(1) * logits.dim(2);
      if (sample.mask.height * sample.mask.width != pixels) {
        throw ContractError("finetune: mask " + std::to_string(sample.mask.height) + "x" +
                            std::to_string(sample.mask.width) + " does not match logits");
      }
      auto loss = ops::cross_entropy(ops::reshape(logits, {static_cast<std::size_t>(k), pixels}),
                                     label_vector(sample.mask));
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw DivergenceError("finetune: non-finite loss at iteration " + std::to_string(it + 1));
      }
      sum += value;
      ops::scale(loss, inv).backward();
    }
    opt.step(schedule.segmentation_lr(it));
    opt.zero_grad();
    const double mean = sum / static_cast<double>(options.batch);
    result.iteration_loss.push_back(mean);
    if (options.on_iteration) options.on_iteration(it + 1, mean);
  }
  return result;
}

metrics::SegReport evaluate_segmentation(const SegModel<float>& model, const std::vector<SegSample>& data,
                                         const std::set<int>& exclude, std::size_t threads) {
  const int k = model.config().num_classes;
  std::vector<metrics::ConfusionMatrix> partial(data.size(), metrics::ConfusionMatrix(k));
  parallel_for(data.size(), threads ? threads : worker_count(), [&](std::size_t i) {
    partial[i].add(model.predict(data[i].image), data[i].mask);
  });
  metrics::ConfusionMatrix total(k);
  for (const auto& p : partial) total.merge(p);
  return metrics::seg_metrics(total, exclude);
}

std::string iteration_loss_csv(const std::vector<double>& loss) {
  std::ostringstream os;
  os << "iteration,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < loss.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, loss[i]);
    os << buf;
  }
  return os.str();
}

}  // namespace svlb::heads
