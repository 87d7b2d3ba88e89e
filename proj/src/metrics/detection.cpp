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

#include "svlb/metrics/detection.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "svlb/error.hpp"

namespace svlb::metrics {

double all_point_ap(const std::vector<bool>& is_tp, std::size_t num_gt) {
  if (num_gt == 0) return 0.0;
  const std::size_t n = is_tp.size();
  std::vector<double> recall(n), precision(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += is_tp[i] ? 1 : 0;
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Envelope from the right, then sum precision over recall steps.
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] != prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

ApReport match_and_ap(const std::vector<ImageBoxes>& images, double iou_thresh) {
  std::set<int> classes;
  for (const auto& img : images) {
    for (const auto& g : img.ground_truth) classes.insert(g.class_id);
  }

  ApReport report;
  for (int cls : classes) {
    struct Ranked {
      double score;
      std::size_t image, index;
    };
    std::vector<Ranked> ranked;
    std::size_t num_gt = 0;
    std::vector<std::vector<std::size_t>> gts(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
      for (std::size_t d = 0; d < images[i].detections.size(); ++d) {
        if (images[i].detections[d].class_id == cls) ranked.push_back({images[i].detections[d].score, i, d});
      }
      for (std::size_t g = 0; g < images[i].ground_truth.size(); ++g) {
        if (images[i].ground_truth[g].class_id == cls) gts[i].push_back(g);
      }
      num_gt += gts[i].size();
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

    std::vector<std::vector<bool>> taken(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) taken[i].assign(gts[i].size(), false);
    std::vector<bool> is_tp;
    is_tp.reserve(ranked.size());
    for (const auto& r : ranked) {
      const auto& det = images[r.image].detections[r.index];
      double best = -1.0;
      std::size_t best_k = 0;
      for (std::size_t k = 0; k < gts[r.image].size(); ++k) {
        const double iou = rotated_iou(det, images[r.image].ground_truth[gts[r.image][k]]);
        if (iou > best) {
          best = iou;
          best_k = k;
        }
      }
      const bool hit = best >= iou_thresh && !taken[r.image][best_k];
      if (hit) taken[r.image][best_k] = true;
      is_tp.push_back(hit);
    }
    report.ap[cls] = all_point_ap(is_tp, num_gt);
    report.num_gt[cls] = num_gt;
  }
  if (!report.ap.empty()) {
    double sum = 0.0;
    for (const auto& [cls, ap] : report.ap) sum += ap;
    report.mean_ap = sum / static_cast<double>(report.ap.size());
  }
  return report;
}

ApReport match_and_ap(const std::vector<RotatedBox>& detections, const std::vector<RotatedBox>& ground_truth,
                      double iou_thresh) {
  return match_and_ap(std::vector<ImageBoxes>{{detections, ground_truth}}, iou_thresh);
}

std::vector<RotatedBox> parse_boxes(const std::string& text, bool with_score) {
  std::vector<RotatedBox> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    RotatedBox b;
    bool ok = static_cast<bool>(fields >> b.class_id);
    if (with_score) ok = ok && static_cast<bool>(fields >> b.score);
    ok = ok && static_cast<bool>(fields >> b.cx >> b.cy >> b.w >> b.h >> b.theta);
    std::string extra;
    if (!ok || (fields >> extra)) {
      throw ParseError("box line " + std::to_string(line_no) + ": expected " +
                       (with_score ? "'class_id score cx cy w h theta'" : "'class_id cx cy w h theta'") + ", got '" +
                       line + "'");
    }
    if (b.w <= 0 || b.h <= 0) throw ParseError("box line " + std::to_string(line_no) + ": w and h must be > 0");
    out.push_back(b);
  }
  return out;
}

std::string format_boxes(const std::vector<RotatedBox>& boxes, bool with_score) {
  std::ostringstream os;
  char buf[256];
  for (const auto& b : boxes) {
    if (with_score) {
      std::snprintf(buf, sizeof buf, "%d %.9g %.9g %.9g %.9g %.9g %.9g\n", b.class_id, b.score, b.cx, b.cy, b.w, b.h,
                    b.theta);
    } else {
      std::snprintf(buf, sizeof buf, "%d %.9g %.9g %.9g %.9g %.9g\n", b.class_id, b.cx, b.cy, b.w, b.h, b.theta);
    }
    os << buf;
  }
  return os.str();
}

std::string ap_report_csv(const ApReport& report) {
  std::ostringstream os;
  os << "class_id,num_gt,ap\n";
  char buf[128];
  for (const auto& [cls, ap] : report.ap) {
    std::snprintf(buf, sizeof buf, "%d,%zu,%.9g\n", cls, report.num_gt.at(cls), ap);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "mean,,%.9g\n", report.mean_ap);
  os << buf;
  return os.str();
}

}  // namespace svlb::metrics
