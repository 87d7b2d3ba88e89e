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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace svlb::metrics {

struct SegMap {
  std::size_t height = 0, width = 0;
  std::vector<std::int32_t> labels;  // row-major
  std::optional<std::int32_t> ignore_id;

  SegMap() = default;
  SegMap(std::size_t h, std::size_t w, std::int32_t fill = 0) : height(h), width(w), labels(h * w, fill) {}

  std::int32_t& at(std::size_t y, std::size_t x) { return labels[y * width + x]; }
  std::int32_t at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }
  bool ignored(std::int32_t label) const { return ignore_id && *ignore_id == label; }

  // Throws ContractError unless every label is < num_classes or ignored.
  void validate(int num_classes) const;
};

// Pixel tallies counts[gt][pred]; merging is plain addition.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = 0);

  int num_classes() const { return k_; }
  std::uint64_t at(int gt, int pred) const { return counts_[static_cast<std::size_t>(gt) * k_ + pred]; }

  // Adds every pixel whose ground truth is not ignored. Throws
  // ContractError on a size mismatch or an out-of-range label.
  void add(const SegMap& pred, const SegMap& gt);
  void merge(const ConfusionMatrix& other);

 private:
  int k_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct SegReport {
  // Classes with no pixels in either map have no entry.
  std::map<int, double> f1, iou;
  double mean_f1 = 0.0, mean_iou = 0.0;
  // Over non-ignored pixels whose ground truth is an included class.
  double overall_accuracy = 0.0;
};

// F1 = 2PR/(P+R) and IoU = TP/(TP+FP+FN) per included class; means over
// included classes that occur. Excluded classes get no entry.
SegReport seg_metrics(const ConfusionMatrix& confusion, const std::set<int>& exclude = {});
SegReport seg_metrics(const SegMap& pred, const SegMap& gt, int num_classes, const std::set<int>& exclude = {});

// "class_id,f1,iou" rows then "mean,<mF1>,<mIoU>" and "oa,<OA>".
std::string seg_report_csv(const SegReport& report);

}  // namespace svlb::metrics
