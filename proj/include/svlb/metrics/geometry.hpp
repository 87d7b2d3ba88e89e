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

#include <array>
#include <vector>

namespace svlb::metrics {

struct Point {
  double x = 0.0, y = 0.0;
};

// Oriented rectangle in pixels. theta rotates the w axis counterclockwise
// from +x. score is only meaningful for detections.
struct RotatedBox {
  double cx = 0.0, cy = 0.0;
  double w = 0.0, h = 0.0;
  double theta = 0.0;
  int class_id = 0;
  double score = 1.0;

  double area() const { return w * h; }
};

// Same rectangle with w >= h and theta in [-pi/2, pi/2).
RotatedBox canonicalize(const RotatedBox& box);

// Corners in counterclockwise order (positive signed area).
std::array<Point, 4> corners(const RotatedBox& box);

// Shoelace signed area.
double polygon_area(const std::vector<Point>& polygon);

// Sutherland-Hodgman clip of a polygon against a convex counterclockwise
// clip polygon.
std::vector<Point> clip_convex(const std::vector<Point>& subject, const std::vector<Point>& clip);

// Intersection over union of two oriented rectangles. Throws ContractError
// when either box has w <= 0 or h <= 0 or a non-finite field.
double rotated_iou(const RotatedBox& a, const RotatedBox& b);

// Closed-form IoU ignoring theta.
double axis_aligned_iou(const RotatedBox& a, const RotatedBox& b);

}  // namespace svlb::metrics
