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

#include "svlb/metrics/segmentation.hpp"

#include <cstdio>
#include <sstream>

#include "svlb/error.hpp"

namespace svlb::metrics {

void SegMap::validate(int num_classes) const {
  if (labels.size() != height * width) throw ContractError("seg map: label count does not match dims");
  for (auto l : labels) {
    if (ignored(l)) continue;
    if (l < 0 || l >= num_classes) {
      throw ContractError("seg map: label " + std::to_string(l) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

ConfusionMatrix::ConfusionMatrix(int num_classes) : k_(num_classes) {
  if (num_classes < 0) throw ContractError("confusion matrix: negative class count");
  counts_.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

void ConfusionMatrix::add(const SegMap& pred, const SegMap& gt) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw ContractError("seg metrics: prediction " + std::to_string(pred.height) + "x" + std::to_string(pred.width) +
                        " vs ground truth " + std::to_string(gt.height) + "x" + std::to_string(gt.width));
  }
  gt.validate(k_);
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const auto g = gt.labels[i];
    if (gt.ignored(g)) continue;
    const auto p = pred.labels[i];
    if (p < 0 || p >= k_) throw ContractError("seg metrics: predicted label " + std::to_string(p) + " out of range");
    ++counts_[static_cast<std::size_t>(g) * k_ + p];
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw ContractError("confusion matrix: class count mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

SegReport seg_metrics(const ConfusionMatrix& cm, const std::set<int>& exclude) {
  SegReport r;
  const int k = cm.num_classes();
  std::uint64_t correct = 0, total = 0;
  for (int c = 0; c < k; ++c) {
    if (exclude.count(c)) continue;
    std::uint64_t tp = cm.at(c, c), fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
      total += cm.at(c, o);
    }
    total += tp;
    correct += tp;
    if (tp + fp + fn == 0) continue;
    const double tpd = static_cast<double>(tp);
    r.iou[c] = tpd / static_cast<double>(tp + fp + fn);
    r.f1[c] = 2.0 * tpd / static_cast<double>(2 * tp + fp + fn);
  }
  for (const auto& [c, v] : r.iou) r.mean_iou += v;
  for (const auto& [c, v] : r.f1) r.mean_f1 += v;
  if (!r.iou.empty()) {
    r.mean_iou /= static_cast<double>(r.iou.size());
    r.mean_f1 /= static_cast<double>(r.f1.size());
  }
  r.overall_accuracy = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  return r;
}

SegReport seg_metrics(const SegMap& pred, const SegMap& gt, int num_classes, const std::set<int>& exclude) {
  ConfusionMatrix cm(num_classes);
  cm.add(pred, gt);
  return seg_metrics(cm, exclude);
}

std::string seg_report_csv(const SegReport& r) {
  std::ostringstream os;
  os << "class_id,f1,iou\n";
  char buf[128];
  for (const auto& [c, iou] : r.iou) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g\n", c, r.f1.at(c), iou);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "mean,%.9g,%.9g\noa,%.9g\n", r.mean_f1, r.mean_iou, r.overall_accuracy);
  os << buf;
  return os.str();
}

}  // namespace svlb::metrics
