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

#include "svlb/vitdet/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "svlb/error.hpp"
#include "svlb/tensor/kernels.hpp"

namespace svlb::vitdet {

void AttentionSchedule::validate(std::size_t layers) const {
  if (window == 0) throw ContractError("attention schedule: window must be >= 1");
  std::vector<int> seen(layers + 1, 0);
  for (const auto* list : {&local_blocks, &global_blocks}) {
    for (auto l : *list) {
      if (l < 1 || l > layers) throw ContractError("attention schedule: layer " + std::to_string(l) + " out of range");
      ++seen[l];
    }
  }
  for (std::size_t l = 1; l <= layers; ++l) {
    if (seen[l] != 1) {
      throw ContractError("attention schedule: layer " + std::to_string(l) + " listed " + std::to_string(seen[l]) +
                          " times");
    }
  }
}

bool AttentionSchedule::is_global(std::size_t layer) const {
  return std::find(global_blocks.begin(), global_blocks.end(), layer) != global_blocks.end();
}

namespace {

double cubic_weight(double x) {
  constexpr double a = -0.75;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

struct CubicTaps {
  std::size_t index[4];
  double weight[4];
};

std::vector<CubicTaps> cubic_axis(std::size_t in, std::size_t out) {
  std::vector<CubicTaps> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    for (int k = 0; k < 4; ++k) {
      const long idx = static_cast<long>(base) + k - 1;
      taps[o].index[k] = static_cast<std::size_t>(std::clamp<long>(idx, 0, static_cast<long>(in) - 1));
      taps[o].weight[k] = cubic_weight(t - static_cast<double>(k - 1));
    }
  }
  return taps;
}

}  // namespace

template <typename T>
Tensor<T> interpolate_pos(const Tensor<T>& table, std::size_t src_grid, std::size_t target_grid) {
  if (target_grid == 0 || src_grid == 0) throw ContractError("interpolate_pos: grid must be >= 1");
  if (table.rank() != 2 || table.dim(0) != src_grid * src_grid) {
    throw DimensionError("interpolate_pos: table " + to_string(table.shape()) + " for grid " +
                         std::to_string(src_grid));
  }
  if (src_grid == target_grid) return table.detach();
  const std::size_t d = table.dim(1);
  const auto taps = cubic_axis(src_grid, target_grid);
  const auto src = table.data();
  std::vector<T> out(target_grid * target_grid * d);
  std::vector<double> acc(d);
  for (std::size_t y = 0; y < target_grid; ++y) {
    for (std::size_t x = 0; x < target_grid; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          const double w = taps[y].weight[i] * taps[x].weight[j];
          const T* row = src.data() + (taps[y].index[i] * src_grid + taps[x].index[j]) * d;
          for (std::size_t c = 0; c < d; ++c) acc[c] += w * static_cast<double>(row[c]);
        }
      }
      T* dst = out.data() + (y * target_grid + x) * d;
      for (std::size_t c = 0; c < d; ++c) dst[c] = static_cast<T>(acc[c]);
    }
  }
  return Tensor<T>({target_grid * target_grid, d}, std::move(out));
}

PadMeta window_pad_meta(std::size_t grid, std::size_t window) {
  if (grid == 0 || window == 0) throw ContractError("window partition: grid and window must be >= 1");
  PadMeta m;
  m.grid = grid;
  m.window = window;
  m.per_side = (grid + window - 1) / window;
  m.padded = m.per_side * window;
  return m;
}

namespace {

// Calls fn(window_row_offset, grid_token) for every real token in window
// order.
template <typename Fn>
void for_each_window_token(const PadMeta& m, Fn&& fn) {
  const std::size_t w = m.window;
  for (std::size_t wy = 0; wy < m.per_side; ++wy)
    for (std::size_t wx = 0; wx < m.per_side; ++wx)
      for (std::size_t ly = 0; ly < w; ++ly)
        for (std::size_t lx = 0; lx < w; ++lx) {
          const std::size_t gy = wy * w + ly, gx = wx * w + lx;
          if (gy >= m.grid || gx >= m.grid) continue;
          fn(((wy * m.per_side + wx) * w + ly) * w + lx, gy * m.grid + gx);
        }
}

}  // namespace

template <typename T>
Tensor<T> window_partition(const Tensor<T>& tokens, const PadMeta& m) {
  if (tokens.rank() != 2 || tokens.dim(0) != m.grid * m.grid) {
    throw DimensionError("window_partition: tokens " + to_string(tokens.shape()) + " for grid " +
                         std::to_string(m.grid));
  }
  const std::size_t h = tokens.dim(1), ww = m.window * m.window;
  std::vector<T> out(m.count() * ww * h, T(0));
  const auto src = tokens.data();
  for_each_window_token(m, [&](std::size_t dst, std::size_t g) {
    std::copy_n(src.data() + g * h, h, out.data() + dst * h);
  });
  return Tensor<T>::make_result({m.count(), ww, h}, std::move(out), {tokens}, [m, h](typename Tensor<T>::Node& self) {
    auto& gx = self.parents[0]->ensure_grad();
    const auto& k = kernels::table<T>();
    for_each_window_token(m, [&](std::size_t dst, std::size_t g) {
      k.accumulate(h, self.grad.data() + dst * h, gx.data() + g * h);
    });
  });
}

template <typename T>
Tensor<T> window_unpartition(const Tensor<T>& windows, const PadMeta& m) {
  const std::size_t ww = m.window * m.window;
  if (windows.rank() != 3 || windows.dim(0) != m.count() || windows.dim(1) != ww) {
    throw DimensionError("window_unpartition: windows " + to_string(windows.shape()) + " for " +
                         std::to_string(m.count()) + " windows of " + std::to_string(ww));
  }
  const std::size_t h = windows.dim(2);
  std::vector<T> out(m.grid * m.grid * h);
  const auto src = windows.data();
  for_each_window_token(m, [&](std::size_t s, std::size_t g) {
    std::copy_n(src.data() + s * h, h, out.data() + g * h);
  });
  return Tensor<T>::make_result({m.grid * m.grid, h}, std::move(out), {windows}, [m, h](typename Tensor<T>::Node& self) {
    auto& gx = self.parents[0]->ensure_grad();
    const auto& k = kernels::table<T>();
    for_each_window_token(m, [&](std::size_t s, std::size_t g) {
      k.accumulate(h, self.grad.data() + g * h, gx.data() + s * h);
    });
  });
}

ops::TokenGroups window_groups(const PadMeta& m) {
  ops::TokenGroups groups(m.count());
  const std::size_t ww = m.window * m.window;
  for_each_window_token(m, [&](std::size_t slot, std::size_t g) { groups[slot / ww].push_back(g); });
  groups.erase(std::remove_if(groups.begin(), groups.end(), [](const auto& g) { return g.empty(); }), groups.end());
  return groups;
}

template <typename T>
Tensor<T> adapted_embed(const vit::Backbone<T>& backbone, const Tensor<T>& image) {
  const auto& cfg = backbone.config();
  if (image.rank() != 3 || image.dim(1) != image.dim(2) || image.dim(1) % cfg.patch != 0) {
    throw DimensionError("adapted_embed: image " + to_string(image.shape()) + " is not a square multiple of patch " +
                         std::to_string(cfg.patch));
  }
  const std::size_t grid = image.dim(1) / cfg.patch;
  auto pos = interpolate_pos(backbone.pos_embed(), cfg.grid(), grid);
  return backbone.embed_patches(ops::patchify(image, cfg.patch), pos);
}

template <typename T>
AdaptedOutput<T> adapted_forward(const vit::Backbone<T>& backbone, const AttentionSchedule& schedule,
                                 const Tensor<T>& tokens, std::size_t grid, const vit::BranchScale& branch_scale) {
  const auto& cfg = backbone.config();
  if (cfg.layers != kAdaptedDepth) {
    throw UnsupportedConfigError("adaptation needs a " + std::to_string(kAdaptedDepth) + "-layer backbone, got " +
                                 std::to_string(cfg.layers));
  }
  schedule.validate(cfg.layers);
  if (tokens.rank() != 2 || tokens.dim(0) != grid * grid) {
    throw DimensionError("adapted_forward: tokens " + to_string(tokens.shape()) + " for grid " + std::to_string(grid));
  }
  const auto local = window_groups(window_pad_meta(grid, schedule.window));
  const auto global = ops::single_group(grid * grid);
  vit::ForwardOptions options;
  for (std::size_t l = 1; l <= cfg.layers; ++l) options.groups.push_back(schedule.is_global(l) ? global : local);
  options.branch_scale = branch_scale;
  options.taps.assign(std::begin(kTapLayers), std::end(kTapLayers));
  auto run = backbone.run(tokens, options);
  return {std::move(run.taps), std::move(run.output), grid};
}

template <typename T>
Tensor<T> drop_path(const Tensor<T>& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("drop_path: rate " + std::to_string(rate) + " not in [0, 1)");
  if (!training || rate == 0.0) return x;
  const bool keep = rng.uniform() >= rate;
  return ops::scale(x, keep ? static_cast<T>(1.0 / (1.0 - rate)) : T(0));
}

vit::BranchScale drop_path_scales(double rate, const Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ContractError("drop_path: rate " + std::to_string(rate) + " not in [0, 1)");
  if (rate == 0.0) return {};
  auto stream = std::make_shared<Rng>(rng);
  return [stream, rate](std::size_t, std::size_t, std::size_t) {
    return stream->uniform() >= rate ? 1.0 / (1.0 - rate) : 0.0;
  };
}

double layerwise_lr(double base, double decay, std::size_t layer_index, std::size_t num_layers) {
  if (layer_index > num_layers) {
    throw ContractError("layerwise_lr: index " + std::to_string(layer_index) + " > " + std::to_string(num_layers));
  }
  return base * std::pow(decay, static_cast<double>(num_layers - layer_index));
}

std::size_t layer_index_of(const std::string& name, std::size_t num_layers) {
  if (name.rfind("patch_embed.", 0) == 0 || name == "pos_embed") return 0;
  const std::string prefix = "encoder.blocks.";
  if (name.rfind(prefix, 0) == 0) {
    const std::size_t l = std::stoul(name.substr(prefix.size()));
    return std::min(l + 1, num_layers);
  }
  return num_layers;
}

#define SVLB_INSTANTIATE_ADAPTER(T)                                                                        \
  template Tensor<T> interpolate_pos(const Tensor<T>&, std::size_t, std::size_t);                          \
  template Tensor<T> window_partition(const Tensor<T>&, const PadMeta&);                                   \
  template Tensor<T> window_unpartition(const Tensor<T>&, const PadMeta&);                                 \
  template Tensor<T> adapted_embed(const vit::Backbone<T>&, const Tensor<T>&);                             \
  template AdaptedOutput<T> adapted_forward(const vit::Backbone<T>&, const AttentionSchedule&, const Tensor<T>&, \
                                            std::size_t, const vit::BranchScale&);                        \
  template Tensor<T> drop_path(const Tensor<T>&, double, bool, Rng&);

SVLB_INSTANTIATE_ADAPTER(float)
SVLB_INSTANTIATE_ADAPTER(double)

}  // namespace svlb::vitdet
