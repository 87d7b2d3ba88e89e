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

#include <cstdint>
#include <string>
#include <string_view>

#include "svlb/metrics/segmentation.hpp"
#include "svlb/tensor/tensor.hpp"

namespace svlb::io {

// Layout (little endian):
//   "SVLR" | u32 version | u8 dtype (0 = f32 image, 1 = i32 labels) |
//   u32 channels | u32 height | u32 width | u8 has_ignore | i32 ignore_id |
//   payload[channels * height * width], channel-major
inline constexpr std::uint32_t kRasterVersion = 1;

std::string encode_image(const TensorF& image);
std::string encode_labels(const metrics::SegMap& labels);

// Throw LoadError naming the failing field (magic, version, dtype, header,
// payload); the payload must match the declared dims exactly.
TensorF decode_image(std::string_view bytes);
metrics::SegMap decode_labels(std::string_view bytes);

void write_image(const std::string& path, const TensorF& image);
void write_labels(const std::string& path, const metrics::SegMap& labels);
TensorF read_image(const std::string& path);
metrics::SegMap read_labels(const std::string& path);

}  // namespace svlb::io
