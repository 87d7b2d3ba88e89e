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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "svlb/error.hpp"
#include "svlb/metrics/detection.hpp"
#include "svlb/metrics/segmentation.hpp"
#include "svlb/rng.hpp"

namespace svlb::metrics {
namespace {

bool inside(const RotatedBox& b, double x, double y) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double dx = x - b.cx, dy = y - b.cy;
  const double u = c * dx + s * dy, v = -s * dx + c * dy;
  return std::abs(u) <= b.w / 2 && std::abs(v) <= b.h / 2;
}

// Uniform samples over the joint bounding square of both boxes.
double monte_carlo_iou(const RotatedBox& a, const RotatedBox& b, std::size_t samples, Rng& rng) {
  const double ra = std::hypot(a.w, a.h) / 2, rb = std::hypot(b.w, b.h) / 2;
  const double x0 = std::min(a.cx - ra, b.cx - rb), x1 = std::max(a.cx + ra, b.cx + rb);
  const double y0 = std::min(a.cy - ra, b.cy - rb), y1 = std::max(a.cy + ra, b.cy + rb);
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = x0 + (x1 - x0) * rng.uniform(), y = y0 + (y1 - y0) * rng.uniform();
    const bool ia = inside(a, x, y), ib = inside(b, x, y);
    both += ia && ib;
    either += ia || ib;
  }
  return either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
}

RotatedBox random_box(Rng& rng, double spread = 4.0) {
  RotatedBox b;
  b.cx = spread * rng.uniform();
  b.cy = spread * rng.uniform();
  b.w = 0.5 + 3.0 * rng.uniform();
  b.h = 0.5 + 3.0 * rng.uniform();
  b.theta = std::numbers::pi * (rng.uniform() - 0.5);
  return b;
}

TEST(RotatedIou, TrivialCases) {
  RotatedBox a{0, 0, 2, 1, 0.3};
  EXPECT_NEAR(rotated_iou(a, a), 1.0, 1e-12);
  RotatedBox far{10, 10, 2, 1, 0.3};
  EXPECT_EQ(rotated_iou(a, far), 0.0);
}

TEST(RotatedIou, ShiftedUnitSquares) {
  RotatedBox a{0, 0, 1, 1, 0}, b{0.5, 0, 1, 1, 0};
  EXPECT_NEAR(rotated_iou(a, b), 1.0 / 3.0, 1e-12);
  Rng rng(1);
  EXPECT_NEAR(monte_carlo_iou(a, b, 1000000, rng), 1.0 / 3.0, 0.005);
}

TEST(RotatedIou, SquareAgainstItsDiagonalTurn) {
  RotatedBox a{0, 0, 1, 1, 0}, b{0, 0, 1, 1, std::numbers::pi / 4};
  const double inter = 2.0 * (std::sqrt(2.0) - 1.0);
  EXPECT_NEAR(rotated_iou(a, b), inter / (2.0 - inter), 1e-12);
  EXPECT_NEAR(rotated_iou(a, b), 0.7071, 0.005);
}

TEST(RotatedIou, RejectsDegenerateBoxes) {
  RotatedBox ok{0, 0, 1, 1, 0};
  EXPECT_THROW(rotated_iou(ok, RotatedBox{0, 0, 0, 1, 0}), ContractError);
  EXPECT_THROW(rotated_iou(RotatedBox{0, 0, 1, -1, 0}, ok), ContractError);
  EXPECT_THROW(rotated_iou(RotatedBox{0, 0, 1, NAN, 0}, ok), ContractError);
}

TEST(RotatedIou, Symmetric) {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    auto a = random_box(rng), b = random_box(rng);
    ASSERT_NEAR(rotated_iou(a, b), rotated_iou(b, a), 1e-9);
  }
}

TEST(RotatedIou, InvariantUnderRigidMotion) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    auto a = random_box(rng), b = random_box(rng);
    const double phi = 2 * std::numbers::pi * rng.uniform(), tx = 50 * rng.normal(), ty = 50 * rng.normal();
    auto move = [&](RotatedBox r) {
      const double c = std::cos(phi), s = std::sin(phi);
      const double x = c * r.cx - s * r.cy + tx, y = s * r.cx + c * r.cy + ty;
      r.cx = x;
      r.cy = y;
      r.theta += phi;
      return r;
    };
    ASSERT_NEAR(rotated_iou(move(a), move(b)), rotated_iou(a, b), 1e-5);
  }
}

TEST(RotatedIou, AxisAlignedMatchesClosedForm) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    auto a = random_box(rng), b = random_box(rng);
    a.theta = b.theta = 0;
    ASSERT_NEAR(rotated_iou(a, b), axis_aligned_iou(a, b), 1e-6);
  }
}

TEST(RotatedIou, MatchesMonteCarlo) {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    auto a = random_box(rng, 2.0), b = random_box(rng, 2.0);
    EXPECT_NEAR(rotated_iou(a, b), monte_carlo_iou(a, b, 1000000, rng), 0.005);
  }
}

TEST(Canonicalize, LongSideFirstAndHalfOpenAngle) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    auto b = random_box(rng);
    b.theta = 20 * (rng.uniform() - 0.5);
    auto c = canonicalize(b);
    EXPECT_GE(c.w, c.h);
    EXPECT_GE(c.theta, -std::numbers::pi / 2);
    EXPECT_LT(c.theta, std::numbers::pi / 2);
    EXPECT_NEAR(rotated_iou(b, c), 1.0, 1e-9);
    const auto pts = corners(c);
    EXPECT_NEAR(polygon_area({pts.begin(), pts.end()}), c.area(), 1e-9);
  }
}

// Independent reference: greedy matching with the closed-form IoU, then
// AP = sum over recall levels of the best precision at or beyond that
// level.
double brute_force_ap(std::vector<RotatedBox> dets, const std::vector<RotatedBox>& gts, double thresh) {
  std::vector<std::size_t> idx(dets.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto x, auto y) { return dets[x].score > dets[y].score; });
  std::vector<bool> used(gts.size(), false);
  std::vector<double> prec, rec;
  std::size_t tp = 0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& d = dets[idx[r]];
    int best = -1;
    double best_iou = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = axis_aligned_iou(d, gts[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= thresh && !used[best]) {
      used[best] = true;
      ++tp;
    }
    prec.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }
  double ap = 0;
  for (std::size_t k = 1; k <= gts.size(); ++k) {
    const double level = static_cast<double>(k) / static_cast<double>(gts.size());
    double best = 0;
    for (std::size_t r = 0; r < prec.size(); ++r)
      if (rec[r] >= level - 1e-12) best = std::max(best, prec[r]);
    ap += best / static_cast<double>(gts.size());
  }
  return ap;
}

TEST(AveragePrecision, TrivialCases) {
  RotatedBox g{5, 5, 2, 1, 0.2};
  auto d = g;
  d.score = 0.9;
  EXPECT_DOUBLE_EQ(match_and_ap({d}, {g}).ap.at(0), 1.0);
  EXPECT_DOUBLE_EQ(match_and_ap({}, {g}).ap.at(0), 0.0);
  EXPECT_DOUBLE_EQ(match_and_ap({}, {g}).mean_ap, 0.0);
}

TEST(AveragePrecision, TwoTargetsThreeDetections) {
  RotatedBox g1{0, 0, 2, 2, 0}, g2{10, 0, 2, 2, 0};
  auto tp1 = g1, fp = RotatedBox{30, 30, 2, 2, 0}, tp2 = g2;
  tp1.score = 0.9;
  fp.score = 0.8;
  tp2.score = 0.7;
  const double ap = match_and_ap({tp1, fp, tp2}, {g1, g2}).ap.at(0);
  EXPECT_NEAR(ap, 0.5 * 1.0 + 0.5 * (2.0 / 3.0), 1e-12);
  EXPECT_NEAR(ap, brute_force_ap({tp1, fp, tp2}, {g1, g2}, 0.5), 1e-12);
}

TEST(AveragePrecision, DuplicateDetectionsCountOnce) {
  RotatedBox g{0, 0, 2, 2, 0};
  auto a = g, b = g;
  a.score = 0.9;
  b.score = 0.8;
  EXPECT_NEAR(match_and_ap({a, b}, {g}).ap.at(0), 1.0, 1e-12);
  b.score = 0.95;
  EXPECT_NEAR(match_and_ap({a, b}, {g}).ap.at(0), 1.0, 1e-12);
}

TEST(AveragePrecision, MatchesBruteForceOnRandomInstances) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RotatedBox> gts, dets;
    const int ng = 1 + static_cast<int>(rng.uniform() * 4), nd = static_cast<int>(rng.uniform() * 7);
    for (int i = 0; i < ng; ++i) {
      auto b = random_box(rng, 6.0);
      b.theta = 0;
      gts.push_back(b);
    }
    for (int i = 0; i < nd; ++i) {
      RotatedBox d = rng.uniform() < 0.6 ? gts[static_cast<std::size_t>(rng.uniform() * ng)] : random_box(rng, 6.0);
      d.cx += 0.3 * rng.normal();
      d.cy += 0.3 * rng.normal();
      d.theta = 0;
      d.score = rng.uniform();
      dets.push_back(d);
    }
    EXPECT_NEAR(match_and_ap(dets, gts).ap.at(0), brute_force_ap(dets, gts, 0.5), 1e-12) << trial;
  }
}

TEST(AveragePrecision, InvariantUnderMonotoneScoreMaps) {
  Rng rng(8);
  std::vector<RotatedBox> gts, dets;
  for (int i = 0; i < 5; ++i) gts.push_back(random_box(rng, 10.0));
  for (int i = 0; i < 12; ++i) {
    auto d = rng.uniform() < 0.5 ? gts[i % 5] : random_box(rng, 10.0);
    d.cx += 0.2 * rng.normal();
    d.score = rng.uniform();
    dets.push_back(d);
  }
  const double base = match_and_ap(dets, gts).ap.at(0);
  auto mapped = dets;
  for (auto& d : mapped) d.score = std::exp(3 * d.score) - 7;
  EXPECT_DOUBLE_EQ(match_and_ap(mapped, gts).ap.at(0), base);
}

TEST(AveragePrecision, MeanOverClassesWithTargets) {
  RotatedBox g0{0, 0, 2, 2, 0, 0}, g1{9, 9, 2, 2, 0, 1};
  auto d0 = g0;
  auto stray = RotatedBox{20, 20, 1, 1, 0, 5, 0.5};
  auto r = match_and_ap({d0, stray}, {g0, g1});
  EXPECT_EQ(r.ap.size(), 2u);
  EXPECT_DOUBLE_EQ(r.ap.at(0), 1.0);
  EXPECT_DOUBLE_EQ(r.ap.at(1), 0.0);
  EXPECT_DOUBLE_EQ(r.mean_ap, 0.5);
}

TEST(BoxFiles, RoundTripAndErrors) {
  std::vector<RotatedBox> boxes{{1.5, 2.25, 3, 1, 0.5, 2, 0.75}, {4, 5, 6, 7, -1.25, 0, 0.125}};
  auto parsed = parse_boxes("# header\n" + format_boxes(boxes, true) + "\n", true);
  ASSERT_EQ(parsed.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(parsed[i].class_id, boxes[i].class_id);
    EXPECT_EQ(parsed[i].score, boxes[i].score);
    EXPECT_EQ(parsed[i].theta, boxes[i].theta);
  }
  EXPECT_EQ(parse_boxes(format_boxes(boxes, false), false).size(), 2u);
  EXPECT_THROW(parse_boxes("1 2 3\n", false), ParseError);
  EXPECT_THROW(parse_boxes("1 2 3 4 5 6 7\n", false), ParseError);
  EXPECT_THROW(parse_boxes("1 2 3 0 5 6\n", false), ParseError);
}

SegMap make_map(std::size_t h, std::size_t w, std::vector<std::int32_t> labels) {
  SegMap m(h, w);
  m.labels = std::move(labels);
  return m;
}

TEST(SegMetrics, PerfectPrediction) {
  auto gt = make_map(2, 3, {0, 1, 2, 2, 1, 0});
  auto r = seg_metrics(gt, gt, 3);
  for (const auto& [c, v] : r.f1) EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_iou, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_f1, 1.0);
  EXPECT_DOUBLE_EQ(r.overall_accuracy, 1.0);
}

TEST(SegMetrics, ComplementIsZeroAccuracy) {
  auto gt = make_map(2, 2, {0, 1, 1, 0});
  auto pred = make_map(2, 2, {1, 0, 0, 1});
  auto r = seg_metrics(pred, gt, 2);
  EXPECT_DOUBLE_EQ(r.overall_accuracy, 0.0);
  EXPECT_DOUBLE_EQ(r.mean_iou, 0.0);
}

TEST(SegMetrics, HandConfusionCase) {
  // gt\pred   0  1  2
  //   0       3  1  0
  //   1       0  2  2
  //   2       1  0  1
  std::vector<std::int32_t> g, p;
  const int counts[3][3] = {{3, 1, 0}, {0, 2, 2}, {1, 0, 1}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int k = 0; k < counts[a][b]; ++k) {
        g.push_back(a);
        p.push_back(b);
      }
  auto gt = make_map(1, g.size(), g), pred = make_map(1, p.size(), p);
  auto r = seg_metrics(pred, gt, 3);
  EXPECT_NEAR(r.iou.at(0), 3.0 / 5.0, 1e-12);
  EXPECT_NEAR(r.iou.at(1), 2.0 / 5.0, 1e-12);
  EXPECT_NEAR(r.iou.at(2), 1.0 / 4.0, 1e-12);
  EXPECT_NEAR(r.f1.at(0), 6.0 / 8.0, 1e-12);
  EXPECT_NEAR(r.f1.at(1), 4.0 / 7.0, 1e-12);
  EXPECT_NEAR(r.f1.at(2), 2.0 / 5.0, 1e-12);
  EXPECT_NEAR(r.overall_accuracy, 6.0 / 10.0, 1e-12);
  EXPECT_NEAR(r.mean_iou, (0.6 + 0.4 + 0.25) / 3, 1e-12);

  auto ex = seg_metrics(pred, gt, 3, {2});
  EXPECT_EQ(ex.iou.count(2), 0u);
  EXPECT_NEAR(ex.mean_iou, (0.6 + 0.4) / 2, 1e-12);
  EXPECT_NEAR(ex.overall_accuracy, 5.0 / 8.0, 1e-12);
}

TEST(SegMetrics, IgnoredPixelsAndErrors) {
  auto gt = make_map(1, 4, {0, 255, 1, 1});
  gt.ignore_id = 255;
  auto pred = make_map(1, 4, {0, 1, 1, 1});
  EXPECT_DOUBLE_EQ(seg_metrics(pred, gt, 2).overall_accuracy, 1.0);
  EXPECT_THROW(seg_metrics(make_map(1, 3, {0, 0, 0}), gt, 2), ContractError);
  EXPECT_THROW(seg_metrics(pred, make_map(1, 4, {0, 5, 0, 0}), 2), ContractError);
}

TEST(SegMetrics, BoundedAndOneOnlyWhenEqual) {
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::int32_t> g(12), p(12);
    for (auto& v : g) v = static_cast<std::int32_t>(rng.uniform() * 3);
    for (std::size_t i = 0; i < 12; ++i) p[i] = rng.uniform() < 0.7 ? g[i] : static_cast<std::int32_t>(rng.uniform() * 3);
    auto r = seg_metrics(make_map(3, 4, p), make_map(3, 4, g), 3);
    EXPECT_LE(r.mean_iou, 1.0);
    EXPECT_LE(r.mean_f1, 1.0);
    EXPECT_EQ(r.mean_iou == 1.0, p == g);
    EXPECT_EQ(r.mean_f1 == 1.0, p == g);
  }
}

TEST(SegMetrics, MergingTalliesEqualsOneShot) {
  auto a = make_map(1, 3, {0, 1, 1}), b = make_map(1, 3, {1, 1, 0});
  ConfusionMatrix left(2), right(2), both(2);
  left.add(a, b);
  right.add(b, a);
  both.add(a, b);
  both.add(b, a);
  left.merge(right);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_EQ(left.at(i, j), both.at(i, j));
}

}  // namespace
}  // namespace svlb::metrics
