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
#include <string>
#include <string_view>
#include <vector>

namespace svlb::vit {

// Width family plus depth and parallelism of a parallel-block ViT.
struct BackboneConfig {
  std::size_t hidden = 768;
  std::size_t layers = 12;
  std::size_t parallelism = 1;
  std::size_t mlp = 3072;
  std::size_t heads = 12;
  std::size_t patch = 16;
  std::size_t image = 224;
  std::size_t in_channels = 3;

  std::size_t grid() const { return image / patch; }
  std::size_t tokens() const { return grid() * grid(); }
  std::size_t patch_dim() const { return patch * patch * in_channels; }

  // Throws ContractError when an invariant does not hold.
  void validate() const;

  bool operator==(const BackboneConfig&) const = default;
};

// Lightweight MAE decoder; MLP width is 4 * hidden.
struct DecoderConfig {
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;

  std::size_t mlp() const { return 4 * hidden; }
  bool operator==(const DecoderConfig&) const = default;
};

struct WidthFamily {
  char letter;
  std::size_t hidden;
  std::size_t mlp;
  std::size_t heads;
};

// B, L, H, G.
const std::vector<WidthFamily>& width_families();

// "ViT-{B|L|H|G}{layers}x{parallelism}", e.g. "ViT-G12x4". Throws
// ParseError naming the offending token.
BackboneConfig parse_model_name(std::string_view name);

// Inverse of parse_model_name. Throws ContractError if the widths are not
// one of the named families.
std::string render_model_name(const BackboneConfig& cfg);

// The four models trained at full scale.
std::vector<std::string> registered_models();

}  // namespace svlb::vit
