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
#include <vector>

#include "svlb/metrics/geometry.hpp"
#include "svlb/tensor/tensor.hpp"

namespace svlb::data {

// Tile origins along one axis: 0, stride, 2 stride, ... with the last one
// clamped to side - tile, i.e. ceil((side - tile) / stride) + 1 origins.
// A tile at least as large as the side gives the single origin 0.
// Throws ContractError for stride, tile or side 0, and for stride > tile
// when more than one tile is needed.
std::vector<std::size_t> axis_origins(std::size_t side, std::size_t tile, std::size_t stride);

struct TileOrigin {
  std::size_t x = 0, y = 0;
};

struct TilePlan {
  std::size_t width = 0, height = 0;
  std::size_t tile_w = 0, tile_h = 0;  // requested tile clamped to the image
  std::size_t stride = 0;
  std::vector<std::size_t> xs, ys;
  std::vector<TileOrigin> origins;  // row-major over (ys, xs)
};

TilePlan plan_tiles(std::size_t side, std::size_t tile, std::size_t stride);
TilePlan plan_tiles(std::size_t width, std::size_t height, std::size_t tile, std::size_t stride);

// Boxes whose centre lies in [x, x + w) x [y, y + h), shifted to tile
// coordinates.
std::vector<metrics::RotatedBox> tile_boxes(const std::vector<metrics::RotatedBox>& boxes, const TileOrigin& origin,
                                            std::size_t tile_w, std::size_t tile_h);

// image [C, H, W] -> [C, h, w] window at (x, y).
TensorF crop(const TensorF& image, std::size_t x, std::size_t y, std::size_t w, std::size_t h);

// Maps a tile [C, th, tw] to logits [K, th, tw].
using TileModel = std::function<TensorF(const TensorF& tile)>;

// Per-pixel mean of the logits of every covering tile. Tiles may run in
// parallel (`threads`, 0 reads SVLB_THREADS); sums are accumulated in
// double in plan order.
TensorF sliding_infer(const TileModel& model, const TensorF& image, std::size_t tile, std::size_t stride,
                      std::size_t threads = 0);

}  // namespace svlb::data
