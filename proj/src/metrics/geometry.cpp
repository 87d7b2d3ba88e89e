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

#include "svlb/metrics/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "svlb/error.hpp"

namespace svlb::metrics {

namespace {

void check(const RotatedBox& b) {
  if (!(std::isfinite(b.cx) && std::isfinite(b.cy) && std::isfinite(b.w) && std::isfinite(b.h) &&
        std::isfinite(b.theta))) {
    throw ContractError("rotated box has a non-finite field");
  }
  if (b.w <= 0.0 || b.h <= 0.0) throw ContractError("rotated box needs w > 0 and h > 0");
}

double cross(const Point& a, const Point& b, const Point& p) {
  return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
}

Point intersect(const Point& p, const Point& q, const Point& a, const Point& b) {
  const double cp = cross(a, b, p), cq = cross(a, b, q);
  const double t = cp / (cp - cq);
  return {p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
}

}  // namespace

RotatedBox canonicalize(const RotatedBox& box) {
  RotatedBox b = box;
  if (b.w < b.h) {
    std::swap(b.w, b.h);
    b.theta += std::numbers::pi / 2;
  }
  const double pi = std::numbers::pi;
  b.theta = std::fmod(b.theta + pi / 2, pi);
  if (b.theta < 0) b.theta += pi;
  b.theta -= pi / 2;
  if (b.theta >= pi / 2) b.theta -= pi;
  return b;
}

std::array<Point, 4> corners(const RotatedBox& b) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double hw = b.w / 2, hh = b.h / 2;
  const double local[4][2] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
  std::array<Point, 4> out;
  for (int i = 0; i < 4; ++i) {
    out[i] = {b.cx + c * local[i][0] - s * local[i][1], b.cy + s * local[i][0] + c * local[i][1]};
  }
  return out;
}

double polygon_area(const std::vector<Point>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return a / 2;
}

std::vector<Point> clip_convex(const std::vector<Point>& subject, const std::vector<Point>& clip) {
  std::vector<Point> out = subject;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const Point& a = clip[e];
    const Point& b = clip[(e + 1) % clip.size()];
    std::vector<Point> in;
    in.swap(out);
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Point& p = in[i];
      const Point& q = in[(i + 1) % in.size()];
      const bool p_in = cross(a, b, p) >= 0.0;
      const bool q_in = cross(a, b, q) >= 0.0;
      if (p_in) out.push_back(p);
      if (p_in != q_in) out.push_back(intersect(p, q, a, b));
    }
  }
  return out;
}

double rotated_iou(const RotatedBox& a, const RotatedBox& b) {
  check(a);
  check(b);
  const auto ca = corners(canonicalize(a));
  const auto cb = corners(canonicalize(b));
  const auto inter_poly = clip_convex({ca.begin(), ca.end()}, {cb.begin(), cb.end()});
  const double inter = inter_poly.size() < 3 ? 0.0 : std::max(0.0, polygon_area(inter_poly));
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double axis_aligned_iou(const RotatedBox& a, const RotatedBox& b) {
  check(a);
  check(b);
  const double ix = std::max(0.0, std::min(a.cx + a.w / 2, b.cx + b.w / 2) - std::max(a.cx - a.w / 2, b.cx - b.w / 2));
  const double iy = std::max(0.0, std::min(a.cy + a.h / 2, b.cy + b.h / 2) - std::max(a.cy - a.h / 2, b.cy - b.h / 2));
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

}  // namespace svlb::metrics
