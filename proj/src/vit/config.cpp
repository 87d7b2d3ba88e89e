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

#include "svlb/vit/config.hpp"

#include <cctype>
#include <charconv>

#include "svlb/error.hpp"

namespace svlb::vit {

void BackboneConfig::validate() const {
  if (hidden == 0 || heads == 0 || hidden % heads != 0) {
    throw ContractError("hidden " + std::to_string(hidden) + " not divisible by heads " + std::to_string(heads));
  }
  if (patch == 0 || image == 0 || image % patch != 0) {
    throw ContractError("image " + std::to_string(image) + " not divisible by patch " + std::to_string(patch));
  }
  if (layers < 1) throw ContractError("layers must be >= 1");
  if (parallelism < 1) throw ContractError("parallelism must be >= 1");
  if (mlp == 0 || in_channels == 0) throw ContractError("mlp and in_channels must be positive");
}

const std::vector<WidthFamily>& width_families() {
  static const std::vector<WidthFamily> families{
      {'B', 768, 3072, 12},
      {'L', 1024, 4096, 16},
      {'H', 1536, 6144, 16},
      {'G', 2048, 8192, 32},
  };
  return families;
}

namespace {

std::size_t parse_count(std::string_view text, std::string_view name, const char* what) {
  std::size_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last || value == 0) {
    throw ParseError("model name '" + std::string(name) + "': bad " + what + " token '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

BackboneConfig parse_model_name(std::string_view name) {
  constexpr std::string_view kPrefix = "ViT-";
  if (name.substr(0, kPrefix.size()) != kPrefix) {
    throw ParseError("model name '" + std::string(name) + "': expected prefix 'ViT-'");
  }
  auto rest = name.substr(kPrefix.size());
  if (rest.empty()) throw ParseError("model name '" + std::string(name) + "': missing size letter");

  const char letter = rest.front();
  const WidthFamily* family = nullptr;
  for (const auto& f : width_families()) {
    if (f.letter == letter) family = &f;
  }
  if (!family) {
    throw ParseError("model name '" + std::string(name) + "': unknown size letter '" + std::string(1, letter) + "'");
  }
  rest.remove_prefix(1);
  const auto x = rest.find('x');
  if (x == std::string_view::npos) {
    throw ParseError("model name '" + std::string(name) + "': missing 'x' before parallelism");
  }

  BackboneConfig cfg;
  cfg.hidden = family->hidden;
  cfg.mlp = family->mlp;
  cfg.heads = family->heads;
  cfg.layers = parse_count(rest.substr(0, x), name, "layers");
  cfg.parallelism = parse_count(rest.substr(x + 1), name, "parallelism");
  return cfg;
}

std::string render_model_name(const BackboneConfig& cfg) {
  for (const auto& f : width_families()) {
    if (f.hidden == cfg.hidden && f.mlp == cfg.mlp && f.heads == cfg.heads) {
      return std::string("ViT-") + f.letter + std::to_string(cfg.layers) + "x" + std::to_string(cfg.parallelism);
    }
  }
  throw ContractError("widths (" + std::to_string(cfg.hidden) + ", " + std::to_string(cfg.mlp) + ", " +
                      std::to_string(cfg.heads) + ") do not match a named model family");
}

std::vector<std::string> registered_models() { return {"ViT-B12x1", "ViT-L12x4", "ViT-H12x4", "ViT-G12x4"}; }

}  // namespace svlb::vit
