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

#include <algorithm>
#include <cmath>
#include <cstring>

#include "svlb/data/subsample.hpp"
#include "svlb/data/synth.hpp"
#include "svlb/data/tiling.hpp"
#include "svlb/error.hpp"

namespace svlb::data {
namespace {

TEST(SynthScene, EmptySceneIsAllBackground) {
  SceneSpec spec;
  spec.num_objects = 0;
  auto s = synth_scene(spec, Rng(1));
  EXPECT_TRUE(s.boxes.empty());
  for (auto l : s.mask.labels) EXPECT_EQ(l, 0);
  EXPECT_EQ(s.image.shape(), (Shape{3, 64, 64}));
  for (float v : s.image.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(SynthScene, FixedSeedIsByteIdentical) {
  SceneSpec spec;
  auto a = synth_scene(spec, Rng(9)), b = synth_scene(spec, Rng(9));
  ASSERT_EQ(a.image.numel(), b.image.numel());
  EXPECT_EQ(std::memcmp(a.image.data().data(), b.image.data().data(), a.image.numel() * sizeof(float)), 0);
  EXPECT_EQ(a.mask.labels, b.mask.labels);
  auto c = synth_scene(spec, Rng(10));
  EXPECT_NE(a.mask.labels, c.mask.labels);
}

TEST(SynthScene, MaskAreasMatchShapeAreas) {
  SceneSpec spec;
  spec.size = 128;
  spec.num_objects = 4;
  spec.classes = 4;
  spec.min_extent = 0.2;
  spec.max_extent = 0.3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto s = synth_scene(spec, Rng(seed));
    ASSERT_EQ(s.boxes.size(), 4u);
    for (std::size_t i = 0; i < s.boxes.size(); ++i) {
      const auto count = std::count(s.instances.labels.begin(), s.instances.labels.end(), static_cast<int>(i + 1));
      EXPECT_NEAR(static_cast<double>(count), shape_area(s.boxes[i]), 0.02 * shape_area(s.boxes[i]))
          << "seed " << seed << " object " << i;
    }
  }
}

TEST(SynthScene, BoxesInsideAndInteriorsLabelled) {
  SceneSpec spec;
  spec.num_objects = 4;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = synth_scene(spec, Rng(seed));
    std::size_t inside = 0, labelled = 0;
    for (const auto& b : s.boxes) {
      for (const auto& p : metrics::corners(b)) {
        EXPECT_GE(p.x, 0.0);
        EXPECT_GE(p.y, 0.0);
        EXPECT_LE(p.x, 64.0);
        EXPECT_LE(p.y, 64.0);
      }
      for (std::size_t y = 0; y < 64; ++y)
        for (std::size_t x = 0; x < 64; ++x)
          if (shape_contains(b, x + 0.5, y + 0.5)) {
            ++inside;
            labelled += s.mask.at(y, x) == b.class_id + 1;
          }
    }
    EXPECT_GE(static_cast<double>(labelled), 0.98 * static_cast<double>(inside));
  }
}

TEST(SynthScene, RejectsBadSpecs) {
  SceneSpec small;
  small.size = 32;
  EXPECT_THROW(synth_scene(small, Rng(1)), ContractError);
  SceneSpec crowded;
  crowded.num_objects = 40;
  crowded.min_extent = 0.4;
  crowded.max_extent = 0.5;
  crowded.attempts = 50;
  EXPECT_THROW(synth_scene(crowded, Rng(1)), InputError);
}

TEST(SynthDataset, IdsAndIndependentStreams) {
  SceneSpec spec;
  auto d = synth_dataset(3, spec, Rng(4));
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].id, "scene-00000");
  EXPECT_EQ(d[2].id, "scene-00002");
  EXPECT_EQ(d[1].mask.labels, synth_scene(spec, Rng(4).split(1), "x").mask.labels);
}

TEST(PlanTiles, ArithmeticExamples) {
  EXPECT_EQ(plan_tiles(1024, 1024, 824).origins.size(), 1u);
  auto p = axis_origins(6000, 512, 384);
  EXPECT_EQ(p.size(), 16u);
  EXPECT_EQ(p.back(), 5488u);
  EXPECT_EQ(p[14], 14u * 384u);
  auto q = axis_origins(20000, 1024, 824);
  EXPECT_EQ(q.size(), 25u);
  EXPECT_EQ(q.back(), 20000u - 1024u);
  EXPECT_EQ(axis_origins(100, 200, 10), (std::vector<std::size_t>{0}));
  EXPECT_EQ(plan_tiles(100, 200, 10).tile_w, 100u);
  EXPECT_THROW(axis_origins(100, 10, 0), ContractError);
}

TEST(PlanTiles, CoverEveryPixel) {
  for (std::size_t side : {1u, 7u, 64u, 100u, 513u})
    for (std::size_t tile : {1u, 5u, 32u, 64u, 600u})
      for (std::size_t stride : {1u, 3u, 24u, 64u, 700u}) {
        if (stride > tile && tile < side) {
          EXPECT_THROW(axis_origins(side, tile, stride), ContractError);
          continue;
        }
        const auto xs = axis_origins(side, tile, stride);
        std::vector<int> cover(side, 0);
        const std::size_t t = std::min(tile, side);
        for (auto x : xs) {
          ASSERT_LE(x + t, side);
          for (std::size_t i = x; i < x + t; ++i) cover[i] = 1;
        }
        EXPECT_EQ(std::count(cover.begin(), cover.end(), 0), 0) << side << " " << tile << " " << stride;
        const std::size_t expected = tile >= side ? 1 : (side - tile + stride - 1) / stride + 1;
        EXPECT_EQ(xs.size(), expected);
      }
}

TEST(TileBoxes, CentreRule) {
  std::vector<metrics::RotatedBox> boxes{{10, 10, 30, 4, 0}, {99, 5, 2, 2, 0}, {100, 5, 2, 2, 0}};
  auto in = tile_boxes(boxes, {0, 0}, 100, 100);
  ASSERT_EQ(in.size(), 2u);
  auto next = tile_boxes(boxes, {50, 0}, 100, 100);
  ASSERT_EQ(next.size(), 2u);
  EXPECT_DOUBLE_EQ(next[1].cx, 50.0);
}

TEST(SlidingInfer, OverlapIsTheMeanOfLogits) {
  // Tile value = tile origin id, so each pixel's mean is known exactly.
  TensorF image({1, 6, 6});
  TileModel model = [](const TensorF& tile) {
    return TensorF::full({1, tile.dim(1), tile.dim(2)}, tile.data()[0]);
  };
  for (std::size_t y = 0; y < 6; ++y)
    for (std::size_t x = 0; x < 6; ++x) image.data()[y * 6 + x] = static_cast<float>(10 * y + x);
  auto out = sliding_infer(model, image, 4, 2);
  // Origins per axis {0, 2}: pixel (0, 3) is covered by tiles at x 0 and 2.
  EXPECT_FLOAT_EQ(out.at({0, 0, 3}), (0.0f + 2.0f) / 2);
  EXPECT_FLOAT_EQ(out.at({0, 3, 3}), (0.0f + 2.0f + 20.0f + 22.0f) / 4);
  EXPECT_FLOAT_EQ(out.at({0, 5, 5}), 22.0f);
}

TEST(SlidingInfer, EqualsBruteForceAverage) {
  Rng rng(5);
  auto image = TensorF::uniform({2, 23, 23}, rng, 0.0f, 1.0f);
  const std::size_t tile = 8, stride = 5;
  // Recorded-logit stub: output depends on tile content and position.
  TileModel model = [](const TensorF& t) {
    std::vector<float> v(3 * t.dim(1) * t.dim(2));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.data()[i % t.numel()] * (1.0f + 0.5f * (i / t.numel()));
    return TensorF({3, t.dim(1), t.dim(2)}, std::move(v));
  };
  auto out = sliding_infer(model, image, tile, stride, 3);
  auto plan = plan_tiles(23, tile, stride);
  std::vector<TensorF> tiles;
  for (const auto& o : plan.origins) tiles.push_back(model(crop(image, o.x, o.y, tile, tile)));
  float worst = 0;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 23; ++y)
      for (std::size_t x = 0; x < 23; ++x) {
        double sum = 0;
        int n = 0;
        for (std::size_t i = 0; i < plan.origins.size(); ++i) {
          const auto& o = plan.origins[i];
          if (x < o.x || y < o.y || x >= o.x + tile || y >= o.y + tile) continue;
          sum += tiles[i].at({c, y - o.y, x - o.x});
          ++n;
        }
        worst = std::max(worst, std::abs(out.at({c, y, x}) - static_cast<float>(sum / n)));
      }
  EXPECT_EQ(worst, 0.0f);
}

TEST(SlidingInfer, ConstantModelAndDisjointTiles) {
  Rng rng(6);
  auto image = TensorF::uniform({3, 16, 16}, rng, 0.0f, 1.0f);
  TileModel constant = [](const TensorF& t) { return TensorF::full({2, t.dim(1), t.dim(2)}, 0.25f); };
  for (std::size_t stride : {1u, 3u, 8u}) {
    const auto out = sliding_infer(constant, image, 8, stride);
    for (float v : out.data()) EXPECT_EQ(v, 0.25f);
  }
  TileModel ident = [](const TensorF& t) { return t; };
  auto out = sliding_infer(ident, image, 4, 4);
  for (std::size_t i = 0; i < image.numel(); ++i) EXPECT_EQ(out.data()[i], image.data()[i]);
}

TEST(Subsample, RoundingAndNesting) {
  EXPECT_EQ(subsample_indices(100, 0.5, Rng(1)).size(), 50u);
  EXPECT_EQ(subsample_indices(100, 1.0, Rng(1)).size(), 100u);
  EXPECT_EQ(subsample_indices(64, 0.1, Rng(1)).size(), 6u);
  EXPECT_THROW(subsample_indices(10, 0.01, Rng(1)), ContractError);
  EXPECT_THROW(subsample_indices(10, 0.0, Rng(1)), ContractError);
  EXPECT_THROW(subsample_indices(10, 1.5, Rng(1)), ContractError);
  auto one = subsample_indices(1000, 0.01, Rng(3));
  auto five = subsample_indices(1000, 0.05, Rng(3));
  EXPECT_TRUE(std::includes(five.begin(), five.end(), one.begin(), one.end()));
  EXPECT_EQ(one, subsample_indices(1000, 0.01, Rng(3)));
}

TEST(Subsample, ReportsMatchRecount) {
  SceneSpec spec;
  spec.num_objects = 3;
  auto scenes = synth_dataset(12, spec, Rng(2));
  auto full = instance_distribution(scenes, subsample_indices(12, 1.0, Rng(0)));
  EXPECT_EQ(full.total, 36u);
  auto idx = subsample_indices(12, 0.5, Rng(7));
  auto rep = instance_distribution(scenes, idx);
  std::map<int, std::uint64_t> recount;
  for (auto i : idx)
    for (const auto& b : scenes[i].boxes) ++recount[b.class_id];
  EXPECT_EQ(rep.counts, recount);
  auto px = pixel_distribution(scenes, idx);
  EXPECT_EQ(px.total, idx.size() * 64u * 64u);
  auto csv = distribution_csv(rep);
  EXPECT_EQ(csv.rfind("class_id,count\n", 0), 0u);
  EXPECT_NE(csv.find("total," + std::to_string(rep.total) + "\n"), std::string::npos);
}

}  // namespace
}  // namespace svlb::data
