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

namespace svlb::io {

inline constexpr const char* kManifestName = "manifest.txt";

// sha256sum-style listing ("<hex>  <relative path>") of every regular file
// under `dir` except the manifest itself, sorted by path.
std::string manifest_text(const std::string& dir);

// Writes manifest_text(dir) to dir/manifest.txt and returns it.
std::string write_manifest(const std::string& dir);

}  // namespace svlb::io
