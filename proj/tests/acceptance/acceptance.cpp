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

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <cmath>
#include <map>
#include <numbers>

#include "gradcheck.hpp"
#include "svlb/data/subsample.hpp"
#include "svlb/data/synth.hpp"
#include "svlb/data/tiling.hpp"
#include "svlb/heads/segmentation.hpp"
#include "svlb/io/checkpoint.hpp"
#include "svlb/mae/pretrain.hpp"
#include "svlb/metrics/detection.hpp"
#include "svlb/optim.hpp"
#include "svlb/vit/cost.hpp"
#include "svlb/vitdet/adapter.hpp"
#include "svlb/vitdet/pyramid.hpp"
#include "svlb/vitdet/schedule.hpp"

namespace svlb::acceptance {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Artifacts of criteria 3, 5 and 11 from the first run, compared in 12.
std::map<int, std::string>& first_artifacts() {
  static std::map<int, std::string> m;
  return m;
}

// ---- 1: parameter counts -------------------------------------------------

std::uint64_t enumerated(const std::vector<std::pair<std::string, Shape>>& list) {
  std::uint64_t total = 0;
  for (const auto& [name, shape] : list) total += numel(shape);
  return total;
}

vit::BackboneConfig random_tiny(Rng& rng) {
  vit::BackboneConfig cfg;
  cfg.heads = 1 + rng.below(3);
  cfg.hidden = 4 * cfg.heads * (1 + rng.below(3));
  cfg.mlp = 1 + rng.below(40);
  cfg.layers = 1 + rng.below(4);
  cfg.parallelism = 1 + rng.below(4);
  cfg.patch = 1 + rng.below(4);
  cfg.image = cfg.patch * (1 + rng.below(5));
  cfg.in_channels = 1 + rng.below(3);
  return cfg;
}

Outcome criterion_1() {
  const std::vector<std::pair<std::string, double>> table{
      {"ViT-B12x1", 86e6}, {"ViT-L12x4", 605.26e6}, {"ViT-H12x4", 1.36e9}, {"ViT-G12x4", 2.42e9}};
  bool pass = true;
  std::string detail;
  for (const auto& [name, expected] : table) {
    const double got = static_cast<double>(vit::count_params(vit::parse_model_name(name)));
    const double rel = std::abs(got - expected) / expected;
    pass &= rel < 0.015;
    detail += name + " " + fmt("%.2fM (%.2f%%); ", got / 1e6, 100 * rel);
  }
  Rng rng(1);
  std::size_t mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const auto cfg = random_tiny(rng);
    if (vit::count_params(cfg) != enumerated(vit::enumerate_parameters(cfg))) ++mismatches;
  }
  pass &= mismatches == 0;
  return {pass, detail + fmt("enumeration mismatches %.0f/200 tiny configs", static_cast<double>(mismatches))};
}

// ---- 2: depth x parallelism equivalence ----------------------------------

Outcome criterion_2() {
  Rng rng(2);
  int equal = 0;
  for (int i = 0; i < 50; ++i) {
    vit::BackboneConfig a;
    a.heads = 1 + rng.below(16);
    a.hidden = a.heads * (1 + rng.below(128));
    a.mlp = 1 + rng.below(8192);
    a.layers = 12;
    a.parallelism = 1;
    const std::uint64_t tokens = 1 + rng.below(5000);
    auto b = a;
    b.layers = 6;
    b.parallelism = 2;
    if (vit::count_params(a) == vit::count_params(b) && vit::estimate_flops(a, tokens) == vit::estimate_flops(b, tokens)) {
      ++equal;
    }
  }
  return {equal == 50, fmt("%.0f/50 draws with identical params and FLOPs", equal)};
}

// ---- 3: gradients --------------------------------------------------------

struct GradCase {
  std::string name;
  testing::GradCheckReport report;
};

std::vector<GradCase> gradient_cases() {
  using testing::check_gradients;
  Rng rng(3);
  auto r = [&](Shape shape) { return TensorD::randn(std::move(shape), rng); };
  std::vector<GradCase> out;
  auto add = [&](std::string name, std::vector<TensorD> leaves, Shape out_shape,
                 const std::function<TensorD()>& f) {
    auto probe = r(std::move(out_shape));
    out.push_back({std::move(name), check_gradients(leaves, [&] { return ops::sum(ops::mul(f(), probe)); })});
  };
  auto a = r({3, 4}), b = r({4, 5}), c = r({3, 4}), bias = r({4});
  add("matmul", {a, b}, {3, 5}, [&] { return ops::matmul(a, b); });
  add("transpose", {a}, {4, 3}, [&] { return ops::transpose(a); });
  add("reshape", {a}, {2, 6}, [&] { return ops::reshape(a, {2, 6}); });
  add("add/sub", {a, c}, {3, 4}, [&] { return ops::sub(ops::add(a, c), ops::mul(c, c)); });
  add("scale", {a}, {3, 4}, [&] { return ops::scale(a, 1.7); });
  add("add_row_bias", {a, bias}, {3, 4}, [&] { return ops::add_row_bias(a, bias); });
  auto w = r({4, 5}), wb = r({5});
  add("linear", {a, w, wb}, {3, 5}, [&] { return ops::linear(a, w, wb); });
  add("mean", {a}, {1}, [&] { return ops::mean(ops::mul(a, a)); });
  auto g = r({4}), be = r({4});
  add("layer_norm", {a, g, be}, {3, 4}, [&] { return ops::layer_norm(a, g, be); });
  add("gelu", {a}, {3, 4}, [&] { return ops::gelu(a); });
  add("softmax", {a}, {3, 4}, [&] { return ops::softmax(a); });
  auto img = r({2, 4, 6});
  add("max_pool2d", {img}, {2, 2, 3}, [&] { return ops::max_pool2d(img); });
  add("avg_pool2d", {img}, {2, 2, 3}, [&] { return ops::avg_pool2d(img); });
  auto map = r({3, 2, 3}), ct = r({3, 2, 2, 2}), cb = r({2});
  add("conv_transpose2x2+bias", {map, ct, cb}, {2, 4, 6},
      [&] { return ops::add_channel_bias(ops::conv_transpose2x2(map, ct), cb); });
  auto cw = r({3, 4}), cwb = r({4}), cg = r({3}), cbe = r({3});
  add("conv1x1", {map, cw, cwb}, {4, 2, 3}, [&] { return ops::conv1x1(map, cw, cwb); });
  add("channel_layer_norm", {map, cg, cbe}, {3, 2, 3}, [&] { return ops::channel_layer_norm(map, cg, cbe); });
  add("channel_scale", {map, cg}, {3, 2, 3}, [&] { return ops::channel_scale(map, cg); });
  add("instance_norm", {map, cg, cbe}, {3, 2, 3}, [&] { return ops::instance_norm(map, cg, cbe); });
  add("upsample_nearest", {map}, {3, 4, 5}, [&] { return ops::upsample_nearest(map, 2, 4, 5); });
  add("select/concat_rows", {a, c}, {5, 4}, [&] { return ops::select_rows(ops::concat_rows(a, c), {5, 0, 0, 3, 1}); });
  auto tok = r({6, 3});
  add("tokens_to_map/map_to_tokens", {tok}, {6, 3},
      [&] { return ops::map_to_tokens(ops::mul(ops::tokens_to_map(tok, 2, 3), ops::tokens_to_map(tok, 2, 3))); });
  auto pimg = r({2, 4, 4});
  add("patchify/unpatchify", {pimg}, {2, 4, 4}, [&] {
    auto p = ops::patchify(pimg, 2);
    return ops::unpatchify(ops::mul(p, p), 2, 4, 4, 2);
  });
  auto qkv = r({5, 12});
  add("attention (windows)", {qkv}, {5, 4}, [&] { return ops::attention(qkv, 2, {{0, 3}, {1, 2, 4}}); });
  add("attention (global)", {qkv}, {5, 4}, [&] { return ops::attention(qkv, 2, ops::single_group(5)); });
  auto logits = r({3, 6});
  out.push_back({"cross_entropy", check_gradients({logits}, [&] { return ops::cross_entropy(logits, {0, 2, -1, 1, 1, 2}); })});
  auto grid = r({25, 3});
  const auto meta = vitdet::window_pad_meta(5, 2);
  add("window_partition/unpartition", {grid}, {25, 3}, [&] {
    auto wins = vitdet::window_partition(grid, meta);
    return vitdet::window_unpartition(ops::mul(wins, wins), meta);
  });

  // Full tiny MAE: every parameter, mask ratio 0.5.
  vit::BackboneConfig enc;
  enc.hidden = 8;
  enc.mlp = 16;
  enc.heads = 2;
  enc.layers = 2;
  enc.parallelism = 2;
  enc.patch = 4;
  enc.image = 8;
  mae::MaeModel<double> model(enc, {8, 1, 2}, Rng(31));
  std::vector<TensorD> leaves;
  for (auto& p : model.parameters()) {
    auto t = p.tensor;
    for (auto& v : t.data()) v += 0.1 * rng.normal();
    leaves.push_back(t);
  }
  auto image = TensorD::uniform({3, 8, 8}, rng, 0.0, 1.0);
  const auto plan = mae::make_mask_plan(4, 0.5, Rng(33));
  out.push_back({"tiny MAE forward/backward", check_gradients(leaves, [&] {
                   auto fwd = mae::mae_forward(model, model.encoder.embed(image), plan);
                   return mae::mae_loss(fwd.pred, image, plan, 4).value;
                 })});
  return out;
}

Outcome criterion_3() {
  const auto cases = gradient_cases();
  bool pass = true;
  std::size_t checked = 0;
  double worst = 0;
  std::string failures, artifact;
  for (const auto& c : cases) {
    pass &= c.report.ok;
    checked += c.report.checked;
    worst = std::max(worst, c.report.worst_rel);
    if (!c.report.ok) failures += " " + c.name + ": " + c.report.first_failure + ";";
    artifact += c.name + " " + std::to_string(c.report.checked) + " " + g17(c.report.worst_rel) + "\n";
  }
  first_artifacts()[3] = artifact;
  return {pass, fmt("%.0f cases, %.0f elements, worst rel err %.2e (< 1e-4, abs floor 1e-6)",
                    static_cast<double>(cases.size()), static_cast<double>(checked), worst) +
                    failures};
}

// ---- 4: masked loss ignores visible pixels -------------------------------

Outcome criterion_4() {
  Rng rng(4);
  const std::size_t patch = 4, side = 16, grid = side / patch;
  auto image = TensorD::uniform({3, side, side}, rng, 0.0, 1.0, true);
  const auto plan = mae::make_mask_plan(grid * grid, 0.75, Rng(40));
  auto pred = TensorD::randn({plan.masked.size(), patch * patch * 3}, rng);
  auto loss = mae::mae_loss(pred, image, plan, patch).value;
  const double before = loss.item();
  loss.backward();
  std::vector<bool> visible(grid * grid, false);
  for (auto v : plan.visible) visible[v] = true;
  auto is_visible = [&](std::size_t y, std::size_t x) { return visible[(y / patch) * grid + x / patch]; };
  std::size_t nonzero_visible = 0, nonzero_masked = 0;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x) {
        const double g = image.grad()[(c * side + y) * side + x];
        if (g != 0.0) ++(is_visible(y, x) ? nonzero_visible : nonzero_masked);
      }
  auto moved = image.detach();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < side; ++y)
      for (std::size_t x = 0; x < side; ++x)
        if (is_visible(y, x)) moved.data()[(c * side + y) * side + x] += rng.normal();
  const double delta = mae::mae_loss(pred, moved, plan, patch).value.item() - before;
  const bool pass = nonzero_visible == 0 && nonzero_masked > 0 && delta == 0.0;
  return {pass, fmt("nonzero visible-pixel grads %.0f, masked-pixel grads %.0f, loss change %.1e",
                    static_cast<double>(nonzero_visible), static_cast<double>(nonzero_masked), delta)};
}

// ---- 5: masking arithmetic -----------------------------------------------

Outcome criterion_5() {
  const auto plan = mae::make_mask_plan(196, 0.75, Rng(5));
  const std::size_t draws = 10000;
  std::vector<std::size_t> counts(196, 0);
  const Rng root(2024);
  for (std::size_t d = 0; d < draws; ++d) {
    for (auto i : mae::make_mask_plan(196, 0.75, root.split(d)).masked) ++counts[i];
  }
  const double mean = draws * 0.75, sigma = std::sqrt(draws * 0.75 * 0.25);
  double worst = 0;
  std::string artifact;
  for (auto n : counts) {
    worst = std::max(worst, std::abs(static_cast<double>(n) - mean) / sigma);
    artifact += std::to_string(n) + ",";
  }
  for (auto v : plan.visible) artifact += " " + std::to_string(v);
  first_artifacts()[5] = artifact;
  const bool pass = plan.visible.size() == 49 && plan.masked.size() == 147 && worst <= 3.0;
  return {pass, fmt("visible %.0f masked %.0f; worst per-token deviation %.2f sigma over 1e4 draws (<= 3)",
                    static_cast<double>(plan.visible.size()), static_cast<double>(plan.masked.size()), worst)};
}

// ---- 6: window attention -------------------------------------------------

vit::BackboneConfig twelve(std::size_t hidden, std::size_t patch, std::size_t image, std::size_t par = 1) {
  vit::BackboneConfig cfg;
  cfg.hidden = hidden;
  cfg.mlp = 2 * hidden;
  cfg.heads = 2;
  cfg.layers = 12;
  cfg.parallelism = par;
  cfg.patch = patch;
  cfg.image = image;
  return cfg;
}

Outcome criterion_6() {
  // Window >= grid: adapted == plain.
  vit::Backbone<float> model(twelve(16, 4, 32, 2), Rng(6));
  Rng rng(60);
  const auto tokens = model.embed(TensorF::uniform({3, 32, 32}, rng, 0.0f, 1.0f));
  double worst = 0;
  for (std::size_t window : {8u, 10u}) {
    vitdet::AttentionSchedule s;
    s.window = window;
    const auto adapted = vitdet::adapted_forward(model, s, tokens, 8);
    const auto plain = model.forward(tokens);
    for (std::size_t i = 0; i < plain.numel(); ++i)
      worst = std::max(worst, static_cast<double>(std::abs(adapted.output.data()[i] - plain.data()[i])));
  }

  // Perturbing one window leaves the others unchanged through local blocks.
  vit::Backbone<double> dmodel(twelve(8, 4, 16), Rng(61));
  vitdet::AttentionSchedule local;
  local.window = 2;
  local.local_blocks = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  local.global_blocks = {12};
  auto base = TensorD::randn({16, 8}, rng);
  auto moved = base.detach();
  for (std::size_t j = 0; j < 8; ++j) moved.data()[j] += rng.normal();  // token (0,0), window 0
  const auto pa = vitdet::adapted_forward(dmodel, local, base, 4);
  const auto pb = vitdet::adapted_forward(dmodel, local, moved, 4);
  bool independent = true;
  for (std::size_t tap = 0; tap < 3; ++tap)
    for (std::size_t t : {2u, 3u, 6u, 7u, 8u, 9u, 12u, 13u, 10u, 11u, 14u, 15u})
      for (std::size_t j = 0; j < 8; ++j) independent &= pa.taps[tap].at({t, j}) == pb.taps[tap].at({t, j});
  double inside = 0, global = 0;
  for (std::size_t j = 0; j < 8; ++j) {
    inside += std::abs(pa.taps[0].at({5, j}) - pb.taps[0].at({5, j}));
    global += std::abs(pa.output.at({15, j}) - pb.output.at({15, j}));
  }

  // Partition round trips.
  bool round_trips = true;
  for (std::size_t g : {14u, 56u, 64u}) {
    const auto meta = vitdet::window_pad_meta(g, 14);
    const auto x = TensorF::randn({g * g, 3}, rng);
    const auto back = vitdet::window_unpartition(vitdet::window_partition(x, meta), meta);
    for (std::size_t i = 0; i < x.numel(); ++i) round_trips &= back.data()[i] == x.data()[i];
  }
  const bool padded = vitdet::window_pad_meta(64, 14).padded == 70;
  const bool pass = worst <= 1e-5 && independent && inside > 0 && global > 0 && round_trips && padded;
  return {pass, fmt("max |adapted - plain| %.2e (<= 1e-5); other windows unchanged %.0f, own window moved %.0f, "
                    "global block moved %.0f",
                    worst, independent, inside > 0, global > 0) +
                    fmt("; round trips g=14/56/64 w=14 exact %.0f (64 padded to %.0f)", round_trips,
                        static_cast<double>(vitdet::window_pad_meta(64, 14).padded))};
}

// ---- 7: pyramid ----------------------------------------------------------

bool same_values(const TensorF& a, const TensorF& b) {
  if (a.shape() != b.shape()) return false;
  for (std::size_t i = 0; i < a.numel(); ++i)
    if (a.data()[i] != b.data()[i]) return false;
  return true;
}

Outcome criterion_7() {
  Rng rng(7);
  const auto x = TensorF::randn({8, 6, 6}, rng);
  const double expected[4] = {4, 2, 1, 0.5};
  bool ratios = true;
  std::string got;
  for (int kind = 1; kind <= 4; ++kind) {
    const auto y = vitdet::scale_block(kind, x, rng);
    const double ratio = static_cast<double>(y.dim(1)) / 6.0;
    ratios &= ratio == expected[kind - 1] && y.dim(2) == y.dim(1);
    got += fmt("%g ", ratio);
  }

  vitdet::SimplePyramid<float> pyr(8, 4, Rng(70));
  std::vector<TensorF> taps;
  for (int i = 0; i < 4; ++i) taps.push_back(TensorF::randn({36, 8}, rng));
  const auto seg0 = pyr.build(vitdet::Task::kSegmentation, taps, 6);
  const auto det0 = pyr.build(vitdet::Task::kDetection, taps, 6);
  bool seg_ok = true, det_ok = true;
  for (int changed = 0; changed < 4; ++changed) {
    auto moved = taps;
    moved[changed] = TensorF::randn({36, 8}, rng);
    const auto seg = pyr.build(vitdet::Task::kSegmentation, moved, 6);
    const auto det = pyr.build(vitdet::Task::kDetection, moved, 6);
    for (int level = 0; level < 4; ++level) {
      seg_ok &= same_values(seg.levels[level], seg0.levels[level]) == (level != changed);
      det_ok &= same_values(det.levels[level], det0.levels[level]) == (changed != 3);
    }
  }
  return {ratios && seg_ok && det_ok,
          "ratios " + got + fmt("; detection depends only on layer 12: %.0f; segmentation level i on tap i only: %.0f",
                                det_ok, seg_ok)};
}

// ---- 8: schedules --------------------------------------------------------

Outcome criterion_8() {
  const double tol = 1e-9;
  double worst = 0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  check(optim::effective_lr(2048, 1.5e-4), 1.2e-3);
  const auto det = vitdet::FinetuneSchedule::detection();
  for (std::size_t e = 0; e < 12; ++e) check(det.detection_lr(e), det.lr * (e < 8 ? 1.0 : e < 11 ? 0.1 : 0.01));
  const auto seg = vitdet::FinetuneSchedule::segmentation(160000);
  const double lr = seg.lr;
  for (std::size_t it : {0u, 1u, 750u, 1499u}) {
    const double regular = lr * (1.0 - it / 160000.0);
    check(seg.segmentation_lr(it), regular * (1.0 - (1.0 - 1e-6) * (1.0 - it / 1500.0)));
  }
  for (std::size_t it : {1500u, 40000u, 80000u, 159999u, 160000u}) check(seg.segmentation_lr(it), lr * (1.0 - it / 160000.0));
  check(vitdet::layerwise_lr(1.0, 0.8, 0, 12), std::pow(0.8, 12));
  const bool linear_tail = seg.warmup_iters == 1500 && seg.warmup_ratio == 1e-6 && seg.poly_power == 1.0 &&
                           seg.segmentation_lr(160000) == 0.0;
  return {worst <= tol && linear_tail, fmt("max abs deviation %.2e (<= 1e-9); warmup 1500 from 1e-6, poly 1.0 to 0: %.0f",
                                           worst, linear_tail)};
}

// ---- 9: evaluation geometry ----------------------------------------------

// Independent closed form for axis-aligned boxes.
double closed_form_iou(const metrics::RotatedBox& a, const metrics::RotatedBox& b) {
  const double ix = std::max(0.0, std::min(a.cx + a.w / 2, b.cx + b.w / 2) - std::max(a.cx - a.w / 2, b.cx - b.w / 2));
  const double iy = std::max(0.0, std::min(a.cy + a.h / 2, b.cy + b.h / 2) - std::max(a.cy - a.h / 2, b.cy - b.h / 2));
  const double inter = ix * iy;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

double monte_carlo_iou(const metrics::RotatedBox& a, const metrics::RotatedBox& b, std::size_t n, Rng& rng) {
  const double ca = std::cos(a.theta), sa = std::sin(a.theta), cb = std::cos(b.theta), sb = std::sin(b.theta);
  auto in = [](const metrics::RotatedBox& r, double c, double s, double x, double y) {
    const double dx = x - r.cx, dy = y - r.cy;
    return std::abs(c * dx + s * dy) <= r.w / 2 && std::abs(-s * dx + c * dy) <= r.h / 2;
  };
  const double ra = std::hypot(a.w, a.h) / 2, rb = std::hypot(b.w, b.h) / 2;
  const double x0 = std::min(a.cx - ra, b.cx - rb), x1 = std::max(a.cx + ra, b.cx + rb);
  const double y0 = std::min(a.cy - ra, b.cy - rb), y1 = std::max(a.cy + ra, b.cy + rb);
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x0 + (x1 - x0) * rng.uniform(), y = y0 + (y1 - y0) * rng.uniform();
    const bool ia = in(a, ca, sa, x, y), ib = in(b, cb, sb, x, y);
    both += ia && ib;
    either += ia || ib;
  }
  return either ? static_cast<double>(both) / static_cast<double>(either) : 0.0;
}

metrics::RotatedBox random_box(Rng& rng, double spread) {
  metrics::RotatedBox b;
  b.cx = spread * rng.uniform();
  b.cy = spread * rng.uniform();
  b.w = 0.5 + 3.0 * rng.uniform();
  b.h = 0.5 + 3.0 * rng.uniform();
  b.theta = std::numbers::pi * (rng.uniform() - 0.5);
  return b;
}

// Enumerates every prefix of the score ranking, then takes the best
// precision at or beyond each recall level k / n.
double brute_force_ap(const std::vector<metrics::RotatedBox>& dets, const std::vector<metrics::RotatedBox>& gts) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return dets[x].score > dets[y].score; });
  std::vector<double> prec, rec;
  std::vector<bool> used(gts.size(), false);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& d = dets[order[k]];
    int best = -1;
    double best_iou = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double iou = closed_form_iou(d, gts[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best = static_cast<int>(g);
      }
    }
    if (best >= 0 && best_iou >= 0.5 && !used[best]) {
      used[best] = true;
      ++tp;
    }
    prec.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    rec.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }
  double ap = 0;
  for (std::size_t k = 1; k <= gts.size(); ++k) {
    const double level = static_cast<double>(k) / static_cast<double>(gts.size());
    double best = 0;
    for (std::size_t i = 0; i < prec.size(); ++i)
      if (rec[i] >= level - 1e-12) best = std::max(best, prec[i]);
    ap += best / static_cast<double>(gts.size());
  }
  return ap;
}

Outcome criterion_9() {
  Rng rng(9);
  double axis_worst = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = random_box(rng, 4.0), b = random_box(rng, 4.0);
    a.theta = b.theta = 0;
    axis_worst = std::max(axis_worst, std::abs(metrics::rotated_iou(a, b) - closed_form_iou(a, b)));
  }
  double mc_worst = 0;
  for (int i = 0; i < 100; ++i) {
    const auto a = random_box(rng, 2.0), b = random_box(rng, 2.0);
    mc_worst = std::max(mc_worst, std::abs(metrics::rotated_iou(a, b) - monte_carlo_iou(a, b, 1000000, rng)));
  }
  double ap_worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<metrics::RotatedBox> gts, dets;
    const std::size_t ng = 1 + rng.below(4), nd = rng.below(7);
    for (std::size_t i = 0; i < ng; ++i) {
      auto b = random_box(rng, 6.0);
      b.theta = 0;
      gts.push_back(b);
    }
    for (std::size_t i = 0; i < nd; ++i) {
      auto d = rng.uniform() < 0.6 ? gts[rng.below(ng)] : random_box(rng, 6.0);
      d.cx += 0.3 * rng.normal();
      d.cy += 0.3 * rng.normal();
      d.theta = 0;
      d.score = rng.uniform();
      dets.push_back(d);
    }
    ap_worst = std::max(ap_worst, std::abs(metrics::match_and_ap(dets, gts).ap.at(0) - brute_force_ap(dets, gts)));
  }
  const bool pass = axis_worst <= 1e-12 && mc_worst <= 0.005 && ap_worst <= 1e-12;
  return {pass, fmt("theta=0 vs closed form %.1e (<= 1e-12); Monte Carlo 1e6 x 100 pairs %.4f (<= 0.005); "
                    "AP vs brute force on 20 instances %.1e (<= 1e-12)",
                    axis_worst, mc_worst, ap_worst)};
}

// ---- 10: tiling ----------------------------------------------------------

Outcome criterion_10() {
  auto ceil_div = [](std::size_t a, std::size_t b) { return (a + b - 1) / b; };
  const auto p1 = data::plan_tiles(6000, 512, 384);
  const auto p2 = data::plan_tiles(20000, 1024, 824);
  const bool counts = p1.xs.size() == ceil_div(6000 - 512, 384) + 1 && p1.xs.size() == 16 && p1.xs.back() == 5488 &&
                      p2.xs.size() == ceil_div(20000 - 1024, 824) + 1 && p2.xs.size() == 25 &&
                      p2.xs.back() == 20000 - 1024 && p1.origins.size() == 256;

  Rng rng(10);
  const auto image = TensorF::uniform({2, 45, 45}, rng, 0.0f, 1.0f);
  const std::size_t tile = 16, stride = 11;
  const data::TileModel stub = [](const TensorF& t) {
    std::vector<float> v(3 * t.dim(1) * t.dim(2));
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = t.data()[i % t.numel()] * (1.0f + 0.25f * (i / t.numel()));
    return TensorF({3, t.dim(1), t.dim(2)}, std::move(v));
  };
  const auto out = data::sliding_infer(stub, image, tile, stride, 2);
  const auto plan = data::plan_tiles(45, tile, stride);
  std::vector<TensorF> logits;
  for (const auto& o : plan.origins) logits.push_back(stub(data::crop(image, o.x, o.y, tile, tile)));
  double worst = 0;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 45; ++y)
      for (std::size_t x = 0; x < 45; ++x) {
        double sum = 0;
        int n = 0;
        for (std::size_t i = 0; i < plan.origins.size(); ++i) {
          const auto& o = plan.origins[i];
          if (x < o.x || y < o.y || x >= o.x + tile || y >= o.y + tile) continue;
          sum += logits[i].at({c, y - o.y, x - o.x});
          ++n;
        }
        worst = std::max(worst, std::abs(static_cast<double>(out.at({c, y, x})) - static_cast<double>(static_cast<float>(sum / n))));
      }
  return {counts && worst == 0.0, fmt("origins/axis %.0f (last %.0f) and %.0f; max |sliding - brute force| %.1e (== 0)",
                                      static_cast<double>(p1.xs.size()), static_cast<double>(p1.xs.back()),
                                      static_cast<double>(p2.xs.size()), worst)};
}

// ---- 11: desk-scale learning -------------------------------------------

vit::BackboneConfig desk_backbone() {
  vit::BackboneConfig b;
  b.hidden = 32;
  b.mlp = 64;
  b.heads = 2;
  b.layers = 12;
  b.patch = 8;
  b.image = 64;
  return b;
}

struct DeskRun {
  std::vector<double> pretrain_loss;
  double pretrained_miou = 0;
  double random_miou = 0;
  std::vector<double> ratio_miou;  // ratios 0.1, 0.5, 1.0
  std::string artifacts;           // concatenated CSVs for the determinism check
};

std::vector<heads::SegSample> seg_samples(const std::vector<data::SceneSample>& scenes,
                                          const std::vector<std::size_t>& idx) {
  std::vector<heads::SegSample> out;
  for (auto i : idx) out.push_back({scenes[i].image, scenes[i].mask});
  return out;
}

DeskRun desk_scale_run() {
  const Rng root(11);
  data::SceneSpec spec;
  spec.classes = 3;
  const auto train = data::synth_dataset(64, spec, root.split("train"));
  const auto test = data::synth_dataset(32, spec, root.split("test"));
  std::vector<std::size_t> all(train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto test_set = seg_samples(test, [&] {
    std::vector<std::size_t> v(test.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    return v;
  }());

  DeskRun run;
  mae::MaeModel<float> mae_model(desk_backbone(), {32, 1, 2}, root.split("mae_init"));
  mae::PretrainSchedule ps;
  ps.epochs = 30;
  ps.batch = 8;
  ps.base_lr = 0.04;
  ps.warmup_epochs = 3;
  mae::PretrainOptions po;
  po.augment.out_side = 64;
  std::vector<TensorF> images;
  for (const auto& s : train) images.push_back(s.image);
  const auto pre = mae::pretrain(mae_model, ps, images, root.split("pretrain"), po);
  run.pretrain_loss = pre.epoch_loss;
  run.artifacts += mae::loss_curve_csv(pre.epoch_loss);
  auto state = mae_model.parameters();
  for (auto& b : mae_model.buffers()) state.push_back(b);
  const auto ckpt = io::make_checkpoint(state, "{}");

  heads::SegModelConfig cfg;
  cfg.backbone = desk_backbone();
  cfg.attention.window = 4;
  cfg.pyramid_width = 32;
  cfg.num_classes = spec.classes + 1;
  auto sched = vitdet::FinetuneSchedule::segmentation(300);
  sched.lr = 1e-3;
  sched.warmup_iters = 30;
  sched.warmup_ratio = 1e-6;
  sched.layer_decay = 1.0;
  heads::FinetuneOptions fo;
  fo.batch = 4;

  auto finetune = [&](bool pretrained, double ratio) {
    heads::SegModel<float> model(cfg, root.split("seg_init"));
    if (pretrained) {
      auto targets = model.parameters();
      for (auto& b : model.buffers()) targets.push_back(b);
      io::apply_checkpoint(ckpt, targets);
    }
    const auto idx = data::subsample_indices(train.size(), ratio, root.split("subsample"));
    const auto res = heads::finetune_segmentation(model, sched, seg_samples(train, idx), root.split("finetune"), fo);
    const auto report = heads::evaluate_segmentation(model, test_set);
    run.artifacts += heads::iteration_loss_csv(res.iteration_loss) + metrics::seg_report_csv(report);
    return report.mean_iou;
  };
  run.random_miou = finetune(false, 1.0);
  for (double r : {0.1, 0.5, 1.0}) run.ratio_miou.push_back(finetune(true, r));
  run.pretrained_miou = run.ratio_miou.back();
  run.artifacts += io::encode_checkpoint(ckpt);
  return run;
}

Outcome criterion_11() {
  const auto run = desk_scale_run();
  first_artifacts()[11] = run.artifacts;
  const auto& l = run.pretrain_loss;
  std::size_t halved_at = 0;
  for (std::size_t e = 0; e < l.size(); ++e) {
    if (l[e] <= 0.5 * l[0]) {
      halved_at = e + 1;
      break;
    }
  }
  const bool monotone = run.ratio_miou[0] <= run.ratio_miou[1] && run.ratio_miou[1] <= run.ratio_miou[2];
  const bool pass = halved_at > 0 && run.pretrained_miou >= 0.6 && run.random_miou <= 0.3 && monotone;
  return {pass, fmt("loss %.4f->%.4f halved at epoch %.0f; mIoU pretrained %.3f", l.front(), l.back(),
                    static_cast<double>(halved_at), run.pretrained_miou) +
                    fmt(" vs %.3f; ratios 0.1/0.5/1.0: %.3f %.3f %.3f", run.random_miou, run.ratio_miou[0],
                        run.ratio_miou[1], run.ratio_miou[2])};
}

// ---- 12: determinism ----------------------------------------------------

Outcome criterion_12() {
  std::string detail;
  bool pass = true;
  for (int id : {3, 5, 11}) {
    if (!first_artifacts().count(id)) {
      pass = false;
      detail += fmt("criterion %.0f has no first-run artifact; ", id);
      continue;
    }
    const std::string first = first_artifacts()[id];
    std::string again;
    if (id == 3) {
      criterion_3();
      again = first_artifacts()[3];
    } else if (id == 5) {
      criterion_5();
      again = first_artifacts()[5];
    } else {
      again = desk_scale_run().artifacts;
    }
    const bool same = again == first;
    pass &= same;
    detail += fmt("criterion %.0f: %.0f bytes ", id, static_cast<double>(first.size())) + (same ? "identical; " : "DIFFER; ");
  }
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace svlb::acceptance

int main(int argc, char** argv) {
  using namespace svlb::acceptance;
  const std::vector<Criterion> criteria{
      {1, "parameter counts", 1, criterion_1},
      {2, "depth x parallelism equivalence", 1, criterion_2},
      {3, "gradient correctness", 30, criterion_3},
      {4, "masked-loss contract", 5, criterion_4},
      {5, "masking arithmetic", 10, criterion_5},
      {6, "window attention", 30, criterion_6},
      {7, "pyramid contract", 10, criterion_7},
      {8, "schedule arithmetic", 1, criterion_8},
      {9, "evaluation geometry", 60, criterion_9},
      {10, "tiling and inference", 10, criterion_10},
      {11, "desk-scale learning", 600, criterion_11},
      {12, "determinism", 900, criterion_12},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    if (!in_time) o.detail += fmt("; over the %.0f s budget", c.budget_s);
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %2d %s (%.2f s): %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
