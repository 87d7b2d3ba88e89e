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
#include <vector>

#include "svlb/vit/transformer.hpp"

namespace svlb::io {

// Layout (little endian):
//   "SVLB" | u32 version | u32 n | n bytes of UTF-8 JSON config
//   records: u32 name_len | name | u8 dtype (0 = f32) | u8 rank |
//            u64 dims[rank] | f32 payload[prod(dims)]
//   u32 CRC32 of every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::string config;  // JSON text
  std::vector<TensorRecord> tensors;

  const TensorRecord* find(std::string_view name) const;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
// Throws LoadError naming the failing field: size, magic, version, crc,
// config, record, dtype, payload.
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Snapshot of named tensors in the given order.
Checkpoint make_checkpoint(const vit::NamedTensors<float>& tensors, std::string config);

struct LoadReport {
  std::vector<std::string> loaded;       // present in both, copied
  std::vector<std::string> initialized;  // only in the model, left as is
  std::vector<std::string> unused;       // only in the checkpoint
};

// Copies every tensor whose name appears in both. Shapes are checked for
// all shared names before anything is written, so a mismatch (LoadError
// "shape") leaves the targets untouched.
LoadReport apply_checkpoint(const Checkpoint& checkpoint, const vit::NamedTensors<float>& targets);

std::string load_report_text(const LoadReport& report);

}  // namespace svlb::io
