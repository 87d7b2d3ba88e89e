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

#include "svlb/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "svlb/error.hpp"

namespace svlb::data {

namespace {

constexpr std::array<std::array<float, 3>, 8> kPalette{{
    {0.90f, 0.20f, 0.15f},
    {0.15f, 0.75f, 0.25f},
    {0.20f, 0.35f, 0.95f},
    {0.95f, 0.85f, 0.10f},
    {0.80f, 0.20f, 0.85f},
    {0.10f, 0.85f, 0.90f},
    {0.98f, 0.55f, 0.05f},
    {0.05f, 0.05f, 0.05f},
}};

bool is_ellipse(int class_id) { return class_id % 2 == 1; }

}  // namespace

std::array<float, 3> class_color(int class_id) {
  if (class_id < 0) throw ContractError("class_color: negative class id");
  if (static_cast<std::size_t>(class_id) < kPalette.size()) return kPalette[class_id];
  // Golden-angle hues beyond the palette.
  const double hue = std::fmod(0.618033988749895 * class_id, 1.0) * 6.0;
  const double f = hue - std::floor(hue);
  const float q = static_cast<float>(1.0 - f), t = static_cast<float>(f);
  switch (static_cast<int>(hue)) {
    case 0: return {1.0f, t, 0.0f};
    case 1: return {q, 1.0f, 0.0f};
    case 2: return {0.0f, 1.0f, t};
    case 3: return {0.0f, q, 1.0f};
    case 4: return {t, 0.0f, 1.0f};
    default: return {1.0f, 0.0f, q};
  }
}

double shape_area(const metrics::RotatedBox& b) {
  return is_ellipse(b.class_id) ? std::numbers::pi * b.w * b.h / 4.0 : b.w * b.h;
}

bool shape_contains(const metrics::RotatedBox& b, double x, double y) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double dx = x - b.cx, dy = y - b.cy;
  const double u = (c * dx + s * dy) / (b.w / 2), v = (-s * dx + c * dy) / (b.h / 2);
  if (is_ellipse(b.class_id)) return u * u + v * v <= 1.0;
  return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
}

SceneSample synth_scene(const SceneSpec& spec, const Rng& rng, const std::string& id) {
  if (spec.size < 64) throw ContractError("synth_scene: size must be >= 64, got " + std::to_string(spec.size));
  if (spec.classes < 1) throw ContractError("synth_scene: classes must be >= 1");
  if (!(spec.min_extent > 0 && spec.min_extent <= spec.max_extent && spec.max_extent <= 1)) {
    throw ContractError("synth_scene: need 0 < min_extent <= max_extent <= 1");
  }
  const std::size_t n = spec.size;
  const double side = static_cast<double>(n);
  SceneSample out;
  out.id = id;
  out.image = TensorF({3, n, n});
  out.mask = metrics::SegMap(n, n);
  out.instances = metrics::SegMap(n, n);

  // Background: a few low-frequency waves plus pixel noise.
  Rng bg = rng.split("background");
  double phase[3][3];
  for (auto& wave : phase)
    for (auto& p : wave) p = bg.uniform(0.0, 2.0 * std::numbers::pi);
  auto img = out.image.data();
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      double v = 0.35;
      for (int k = 0; k < 3; ++k) {
        v += 0.04 * std::sin(phase[k][0] + (k + 1) * 2.0 * std::numbers::pi * (x * std::cos(phase[k][1])) / side +
                             (k + 1) * 2.0 * std::numbers::pi * (y * std::sin(phase[k][1])) / side);
      }
      for (std::size_t c = 0; c < 3; ++c) img[(c * n + y) * n + x] = static_cast<float>(v + 0.03 * bg.normal());
    }
  }

  Rng place = rng.split("objects");
  for (std::size_t i = 0; i < spec.num_objects; ++i) {
    Rng obj = place.split(i);
    metrics::RotatedBox box;
    box.class_id = static_cast<int>(obj.below(static_cast<std::uint64_t>(spec.classes)));
    std::vector<std::size_t> pixels;
    bool placed = false;
    for (std::size_t attempt = 0; attempt < spec.attempts && !placed; ++attempt) {
      box.w = side * obj.uniform(spec.min_extent, spec.max_extent);
      box.h = side * obj.uniform(spec.min_extent, spec.max_extent);
      box.theta = obj.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
      box.cx = obj.uniform(0.0, side);
      box.cy = obj.uniform(0.0, side);
      bool inside = true;
      for (const auto& p : metrics::corners(box)) {
        inside = inside && p.x >= 0 && p.y >= 0 && p.x <= side && p.y <= side;
      }
      if (!inside) continue;
      pixels.clear();
      bool clash = false;
      for (std::size_t y = 0; y < n && !clash; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
          if (!shape_contains(box, x + 0.5, y + 0.5)) continue;
          if (out.instances.labels[y * n + x] != 0) {
            clash = true;
            break;
          }
          pixels.push_back(y * n + x);
        }
      }
      placed = !clash && !pixels.empty();
    }
    if (!placed) {
      throw InputError("synth_scene: cannot place object " + std::to_string(i + 1) + " of " +
                       std::to_string(spec.num_objects) + " without overlap in a " + std::to_string(n) + "px scene");
    }
    const auto color = class_color(box.class_id);
    for (auto p : pixels) {
      out.instances.labels[p] = static_cast<std::int32_t>(i + 1);
      out.mask.labels[p] = box.class_id + 1;
      for (std::size_t c = 0; c < 3; ++c) img[c * n * n + p] = static_cast<float>(color[c] + 0.03 * obj.normal());
    }
    out.boxes.push_back(box);
  }
  for (auto& v : img) v = std::clamp(v, 0.0f, 1.0f);
  return out;
}

std::vector<SceneSample> synth_dataset(std::size_t count, const SceneSpec& spec, const Rng& rng) {
  std::vector<SceneSample> out;
  out.reserve(count);
  char id[32];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(id, sizeof id, "scene-%05zu", i);
    out.push_back(synth_scene(spec, rng.split(i), id));
  }
  return out;
}

}  // namespace svlb::data
