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

#include <string>
#include <vector>

#include "svlb/data/synth.hpp"

namespace svlb::io {

// Directory layout, one entry per sample id:
//   images/<id>.svlr  f32 raster [3, S, S]
//   masks/<id>.svlr   i32 label raster
//   boxes/<id>.txt    ground-truth boxes, one per line
void write_dataset(const std::string& dir, const std::vector<data::SceneSample>& samples);

// Samples sorted by id. Masks and boxes are optional per sample; the
// instance map is not stored and comes back empty.
std::vector<data::SceneSample> read_dataset(const std::string& dir);

}  // namespace svlb::io
