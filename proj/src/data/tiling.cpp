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

#include "svlb/data/tiling.hpp"

#include <algorithm>

#include "svlb/error.hpp"
#include "svlb/parallel.hpp"

namespace svlb::data {

std::vector<std::size_t> axis_origins(std::size_t side, std::size_t tile, std::size_t stride) {
  if (stride == 0) throw ContractError("plan_tiles: stride must be > 0");
  if (tile == 0 || side == 0) throw ContractError("plan_tiles: side and tile must be > 0");
  if (tile >= side) return {0};
  if (stride > tile) {
    throw ContractError("plan_tiles: stride " + std::to_string(stride) + " exceeds tile " + std::to_string(tile) +
                        " and would leave gaps");
  }
  const std::size_t count = (side - tile + stride - 1) / stride + 1;
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::min(i * stride, side - tile);
  return out;
}

TilePlan plan_tiles(std::size_t width, std::size_t height, std::size_t tile, std::size_t stride) {
  TilePlan p;
  p.width = width;
  p.height = height;
  p.stride = stride;
  p.xs = axis_origins(width, tile, stride);
  p.ys = axis_origins(height, tile, stride);
  p.tile_w = std::min(tile, width);
  p.tile_h = std::min(tile, height);
  for (auto y : p.ys)
    for (auto x : p.xs) p.origins.push_back({x, y});
  return p;
}

TilePlan plan_tiles(std::size_t side, std::size_t tile, std::size_t stride) {
  return plan_tiles(side, side, tile, stride);
}

std::vector<metrics::RotatedBox> tile_boxes(const std::vector<metrics::RotatedBox>& boxes, const TileOrigin& origin,
                                            std::size_t tile_w, std::size_t tile_h) {
  std::vector<metrics::RotatedBox> out;
  const double x0 = static_cast<double>(origin.x), y0 = static_cast<double>(origin.y);
  for (auto b : boxes) {
    if (b.cx < x0 || b.cy < y0 || b.cx >= x0 + tile_w || b.cy >= y0 + tile_h) continue;
    b.cx -= x0;
    b.cy -= y0;
    out.push_back(b);
  }
  return out;
}

TensorF crop(const TensorF& image, std::size_t x, std::size_t y, std::size_t w, std::size_t h) {
  if (image.rank() != 3) throw DimensionError("crop: expected [C,H,W], got " + to_string(image.shape()));
  const std::size_t c = image.dim(0), ih = image.dim(1), iw = image.dim(2);
  if (x + w > iw || y + h > ih) throw ContractError("crop: window outside the image");
  std::vector<float> out(c * h * w);
  const auto src = image.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t r = 0; r < h; ++r)
      std::copy_n(src.data() + (ch * ih + y + r) * iw + x, w, out.data() + (ch * h + r) * w);
  return TensorF({c, h, w}, std::move(out));
}

TensorF sliding_infer(const TileModel& model, const TensorF& image, std::size_t tile, std::size_t stride,
                      std::size_t threads) {
  if (image.rank() != 3) throw DimensionError("sliding_infer: expected [C,H,W], got " + to_string(image.shape()));
  const std::size_t h = image.dim(1), w = image.dim(2);
  const auto plan = plan_tiles(w, h, tile, stride);
  std::vector<TensorF> outputs(plan.origins.size());
  parallel_for(plan.origins.size(), threads ? threads : worker_count(), [&](std::size_t i) {
    NoGradGuard guard;
    const auto& o = plan.origins[i];
    outputs[i] = model(crop(image, o.x, o.y, plan.tile_w, plan.tile_h));
    const auto& s = outputs[i].shape();
    if (s.size() != 3 || s[1] != plan.tile_h || s[2] != plan.tile_w) {
      throw DimensionError("sliding_infer: tile model returned " + to_string(s));
    }
  });
  const std::size_t k = outputs.front().dim(0);
  std::vector<double> sum(k * h * w, 0.0);
  std::vector<std::uint32_t> count(h * w, 0);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].dim(0) != k) throw DimensionError("sliding_infer: tiles disagree on the class count");
    const auto& o = plan.origins[i];
    const auto d = outputs[i].data();
    for (std::size_t r = 0; r < plan.tile_h; ++r)
      for (std::size_t col = 0; col < plan.tile_w; ++col) {
        const std::size_t p = (o.y + r) * w + o.x + col;
        ++count[p];
        for (std::size_t c = 0; c < k; ++c) sum[c * h * w + p] += d[(c * plan.tile_h + r) * plan.tile_w + col];
      }
  }
  std::vector<float> out(k * h * w);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t p = 0; p < h * w; ++p) out[c * h * w + p] = static_cast<float>(sum[c * h * w + p] / count[p]);
  return TensorF({k, h, w}, std::move(out));
}

}  // namespace svlb::data
