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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "svlb/metrics/geometry.hpp"
#include "svlb/metrics/segmentation.hpp"
#include "svlb/tensor/tensor.hpp"

namespace svlb::data {

struct SceneSpec {
  std::size_t size = 64;
  std::size_t num_objects = 3;
  int classes = 3;
  // Object extents as fractions of the image side.
  double min_extent = 0.15;
  double max_extent = 0.35;
  // Placement attempts per object before giving up.
  std::size_t attempts = 200;
};

// Objects of class c are drawn as rotated rectangles (even c) or ellipses
// (odd c) in a fixed per-class colour. Mask labels are 0 for background
// and class_id + 1 inside objects; `instances` holds 0 or object index + 1.
struct SceneSample {
  TensorF image;  // [3, size, size] in [0, 1]
  std::vector<metrics::RotatedBox> boxes;
  metrics::SegMap mask;
  metrics::SegMap instances;
  std::string id;
};

// Colour of class c, each channel in [0, 1].
std::array<float, 3> class_color(int class_id);

// Objects never share a pixel and lie fully inside the image. Throws
// ContractError for size < 64 or classes < 1 and InputError when an
// object cannot be placed.
SceneSample synth_scene(const SceneSpec& spec, const Rng& rng, const std::string& id = "scene");

// count scenes drawn from rng.split(i), ids "scene-00000", ...
std::vector<SceneSample> synth_dataset(std::size_t count, const SceneSpec& spec, const Rng& rng);

// Area of the drawn shape: w h for rectangles, pi w h / 4 for ellipses.
double shape_area(const metrics::RotatedBox& box);
bool shape_contains(const metrics::RotatedBox& box, double x, double y);

}  // namespace svlb::data
