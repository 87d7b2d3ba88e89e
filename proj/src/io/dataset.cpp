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

#include "svlb/io/dataset.hpp"

#include <algorithm>
#include <filesystem>

#include "svlb/error.hpp"
#include "svlb/io/bytes.hpp"
#include "svlb/io/raster.hpp"
#include "svlb/metrics/detection.hpp"

namespace svlb::io {

namespace fs = std::filesystem;

void write_dataset(const std::string& dir, const std::vector<data::SceneSample>& samples) {
  const fs::path root(dir);
  for (const char* sub : {"images", "masks", "boxes"}) fs::create_directories(root / sub);
  for (const auto& s : samples) {
    write_image((root / "images" / (s.id + ".svlr")).string(), s.image);
    write_labels((root / "masks" / (s.id + ".svlr")).string(), s.mask);
    write_file((root / "boxes" / (s.id + ".txt")).string(), metrics::format_boxes(s.boxes, false));
  }
}

std::vector<data::SceneSample> read_dataset(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root / "images")) throw InputError("dataset: no images/ directory in '" + dir + "'");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root / "images")) {
    if (entry.is_regular_file() && entry.path().extension() == ".svlr") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) throw InputError("dataset: '" + dir + "' has no images");
  std::vector<data::SceneSample> out;
  for (const auto& id : ids) {
    data::SceneSample s;
    s.id = id;
    s.image = read_image((root / "images" / (id + ".svlr")).string());
    if (const auto m = root / "masks" / (id + ".svlr"); fs::exists(m)) s.mask = read_labels(m.string());
    if (const auto b = root / "boxes" / (id + ".txt"); fs::exists(b)) s.boxes = metrics::parse_boxes(read_file(b.string()), false);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace svlb::io
