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

#include "svlb/mae/augment.hpp"

#include <algorithm>
#include <cmath>

#include "svlb/error.hpp"

namespace svlb::mae {

CropBox sample_crop(std::size_t height, std::size_t width, Rng& rng, const AugmentOptions& o) {
  const double area = static_cast<double>(height * width);
  const double log_lo = std::log(o.min_ratio), log_hi = std::log(o.max_ratio);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * rng.uniform(o.min_scale, o.max_scale);
    const double ratio = std::exp(rng.uniform(log_lo, log_hi));
    const auto w = static_cast<std::size_t>(std::lround(std::sqrt(target * ratio)));
    const auto h = static_cast<std::size_t>(std::lround(std::sqrt(target / ratio)));
    if (w > 0 && h > 0 && w <= width && h <= height) {
      const std::size_t top = rng.below(height - h + 1);
      const std::size_t left = rng.below(width - w + 1);
      return {top, left, h, w};
    }
  }
  const double in_ratio = static_cast<double>(width) / static_cast<double>(height);
  std::size_t w = width, h = height;
  if (in_ratio < o.min_ratio) {
    h = static_cast<std::size_t>(std::lround(static_cast<double>(w) / o.min_ratio));
  } else if (in_ratio > o.max_ratio) {
    w = static_cast<std::size_t>(std::lround(static_cast<double>(h) * o.max_ratio));
  }
  return {(height - h) / 2, (width - w) / 2, h, w};
}

TensorF resize_bilinear(const TensorF& image, const CropBox& box, std::size_t out_h, std::size_t out_w) {
  if (image.rank() != 3) throw DimensionError("resize_bilinear: expected [C,H,W], got " + to_string(image.shape()));
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (box.height == 0 || box.width == 0 || box.top + box.height > h || box.left + box.width > w) {
    throw ContractError("resize_bilinear: crop box outside image");
  }
  auto axis = [](std::size_t out, std::size_t in, std::size_t offset) {
    struct Tap {
      std::size_t i0, i1;
      double f;
    };
    std::vector<Tap> taps(out);
    const double s = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
      double src = (static_cast<double>(o) + 0.5) * s - 0.5;
      src = std::clamp(src, 0.0, static_cast<double>(in - 1));
      const auto i0 = static_cast<std::size_t>(std::floor(src));
      const std::size_t i1 = std::min(i0 + 1, in - 1);
      taps[o] = {offset + i0, offset + i1, src - static_cast<double>(i0)};
    }
    return taps;
  };
  const auto ty = axis(out_h, box.height, box.top);
  const auto tx = axis(out_w, box.width, box.left);
  std::vector<float> out(c * out_h * out_w);
  const auto src = image.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    const float* plane = src.data() + ch * h * w;
    for (std::size_t y = 0; y < out_h; ++y) {
      const auto& a = ty[y];
      for (std::size_t x = 0; x < out_w; ++x) {
        const auto& b = tx[x];
        const double top = plane[a.i0 * w + b.i0] * (1.0 - b.f) + plane[a.i0 * w + b.i1] * b.f;
        const double bottom = plane[a.i1 * w + b.i0] * (1.0 - b.f) + plane[a.i1 * w + b.i1] * b.f;
        out[(ch * out_h + y) * out_w + x] = static_cast<float>(top * (1.0 - a.f) + bottom * a.f);
      }
    }
  }
  return TensorF({c, out_h, out_w}, std::move(out));
}

TensorF flip(const TensorF& image, bool horizontal, bool vertical) {
  if (image.rank() != 3) throw DimensionError("flip: expected [C,H,W], got " + to_string(image.shape()));
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  std::vector<float> out(image.numel());
  const auto src = image.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t sy = vertical ? h - 1 - y : y;
        const std::size_t sx = horizontal ? w - 1 - x : x;
        out[(ch * h + y) * w + x] = src[(ch * h + sy) * w + sx];
      }
  return TensorF(image.shape(), std::move(out));
}

TensorF augment(const TensorF& image, Rng& rng, const AugmentOptions& o) {
  if (image.rank() != 3) throw DimensionError("augment: expected [C,H,W], got " + to_string(image.shape()));
  const std::size_t h = image.dim(1), w = image.dim(2);
  if (h < kMinAugmentSide || w < kMinAugmentSide) {
    throw InputError("augment: image " + std::to_string(h) + "x" + std::to_string(w) + " is smaller than " +
                     std::to_string(kMinAugmentSide) + "x" + std::to_string(kMinAugmentSide));
  }
  const CropBox box = o.crop ? sample_crop(h, w, rng, o) : CropBox{0, 0, h, w};
  auto out = resize_bilinear(image, box, o.out_side, o.out_side);
  const bool hflip = rng.bernoulli(o.hflip_p);
  const bool vflip = rng.bernoulli(o.vflip_p);
  return (hflip || vflip) ? flip(out, hflip, vflip) : out;
}

}  // namespace svlb::mae
