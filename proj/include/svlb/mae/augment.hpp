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

#include "svlb/rng.hpp"
#include "svlb/tensor/tensor.hpp"

namespace svlb::mae {

inline constexpr std::size_t kMinAugmentSide = 32;

struct AugmentOptions {
  std::size_t out_side = 224;
  bool crop = true;
  double min_scale = 0.2;
  double max_scale = 1.0;
  double min_ratio = 3.0 / 4.0;
  double max_ratio = 4.0 / 3.0;
  double hflip_p = 0.5;
  double vflip_p = 0.5;
};

struct CropBox {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

// Random-resized-crop region: ten area/aspect attempts, then a centred crop
// with the aspect clamped into range.
CropBox sample_crop(std::size_t height, std::size_t width, Rng& rng, const AugmentOptions& options);

// Bilinear resample of image[C,H,W] restricted to box (half-pixel centres,
// edge clamped).
TensorF resize_bilinear(const TensorF& image, const CropBox& box, std::size_t out_h, std::size_t out_w);

TensorF flip(const TensorF& image, bool horizontal, bool vertical);

// Crop-resize to out_side^2, then horizontal and vertical flips, each drawn
// independently. Draw order: crop, hflip, vflip. Throws InputError when
// either side is below kMinAugmentSide.
TensorF augment(const TensorF& image, Rng& rng, const AugmentOptions& options = {});

}  // namespace svlb::mae
