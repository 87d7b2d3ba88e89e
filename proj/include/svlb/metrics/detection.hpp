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

#include <map>
#include <string>
#include <vector>

#include "svlb/metrics/geometry.hpp"

namespace svlb::metrics {

struct ImageBoxes {
  std::vector<RotatedBox> detections;
  std::vector<RotatedBox> ground_truth;
};

struct ApReport {
  // Classes with at least one ground-truth box.
  std::map<int, double> ap;
  std::map<int, std::size_t> num_gt;
  double mean_ap = 0.0;
};

// Area under the monotone precision envelope of a ranked list of
// true/false positives against num_gt ground-truth boxes.
double all_point_ap(const std::vector<bool>& is_tp, std::size_t num_gt);

// Per class: detections sorted by descending score (ties by input order,
// images in order), each greedily matched to the highest-IoU ground truth
// of its image; a hit needs IoU >= iou_thresh and an unmatched target.
ApReport match_and_ap(const std::vector<ImageBoxes>& images, double iou_thresh = 0.5);
ApReport match_and_ap(const std::vector<RotatedBox>& detections, const std::vector<RotatedBox>& ground_truth,
                      double iou_thresh = 0.5);

// One box per line: `class_id score cx cy w h theta_rad` (detections) or
// `class_id cx cy w h theta_rad` (ground truth). Blank lines and lines
// starting with '#' are skipped. Throws ParseError naming the line.
std::vector<RotatedBox> parse_boxes(const std::string& text, bool with_score);
std::string format_boxes(const std::vector<RotatedBox>& boxes, bool with_score);

// "class_id,num_gt,ap" rows then "mean,,<mAP>".
std::string ap_report_csv(const ApReport& report);

}  // namespace svlb::metrics
