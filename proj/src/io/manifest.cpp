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

#include "svlb/io/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <vector>

#include "svlb/io/bytes.hpp"

namespace svlb::io {

namespace fs = std::filesystem;

std::string manifest_text(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto rel = fs::relative(entry.path(), dir).generic_string();
    if (rel != kManifestName) paths.push_back(std::move(rel));
  }
  std::sort(paths.begin(), paths.end());
  std::string out;
  for (const auto& rel : paths) {
    out += sha256_hex(read_file((fs::path(dir) / rel).string()));
    out += "  ";
    out += rel;
    out += '\n';
  }
  return out;
}

std::string write_manifest(const std::string& dir) {
  auto text = manifest_text(dir);
  write_file((fs::path(dir) / kManifestName).string(), text);
  return text;
}

}  // namespace svlb::io
