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

#include "svlb/io/config.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "svlb/error.hpp"
#include "svlb/io/bytes.hpp"

namespace svlb::io {

using nlohmann::json;

namespace {

// Reads typed fields from one JSON object and rejects keys never read.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ParseError("config: '" + display() + "' must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  void get(const char* key, std::size_t& out) {
    if (const json* v = field(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void get(const char* key, int& out) {
    if (const json* v = field(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<int>();
    }
  }
  void get(const char* key, double& out) {
    if (const json* v = field(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, bool& out) {
    if (const json* v = field(key)) {
      if (!v->is_boolean()) fail(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = field(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  void get(const char* key, std::vector<int>& out) {
    if (const json* v = field(key)) {
      if (!v->is_array()) fail(key, "an array of integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer()) fail(key, "an array of integers");
        out.push_back(e.get<int>());
      }
    }
  }
  void accept(const char* key) { seen_.insert(key); }
  Section child(const char* key) {
    seen_.insert(key);
    return Section(j_.at(key), path_ + key + ".");
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ParseError("config: unknown key '" + path_ + item.key() + "'");
    }
  }

 private:
  const json* field(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ParseError("config: '" + path_ + key + "' must be " + what);
  }
  std::string display() const { return path_.empty() ? "<root>" : path_.substr(0, path_.size() - 1); }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ContractError("config: " + what);
}

}  // namespace

const std::vector<std::string>& config_tasks() {
  static const std::vector<std::string> tasks{"pretrain", "adapt", "finetune-seg", "eval", "analyze", "subsample",
                                              "synth"};
  return tasks;
}

vit::BackboneConfig ExperimentConfig::resolved_backbone() const {
  return backbone ? *backbone : vit::parse_model_name(model);
}

std::size_t ExperimentConfig::eval_tile() const { return eval.tile ? eval.tile : resolved_backbone().image; }

std::size_t ExperimentConfig::eval_stride() const {
  return eval.stride ? eval.stride : std::max<std::size_t>(1, eval_tile() * 3 / 4);
}

mae::PretrainSchedule ExperimentConfig::pretrain_schedule() const {
  mae::PretrainSchedule s;
  s.epochs = pretrain.epochs;
  s.base_lr = pretrain.base_lr;
  s.weight_decay = pretrain.weight_decay;
  s.batch = pretrain.batch;
  s.mask_ratio = pretrain.mask_ratio;
  s.warmup_epochs = pretrain.warmup_epochs;
  return s;
}

void ExperimentConfig::validate() const {
  const auto& tasks = config_tasks();
  require(std::find(tasks.begin(), tasks.end(), task) != tasks.end(), "unknown task '" + task + "'");
  resolved_backbone().validate();
  require(decoder.hidden > 0 && decoder.layers > 0 && decoder.heads > 0 && decoder.hidden % decoder.heads == 0,
          "decoder needs positive sizes with hidden divisible by heads");
  require(pretrain.epochs > 0 && pretrain.batch > 0, "pretrain epochs and batch must be >= 1");
  require(pretrain.warmup_epochs <= pretrain.epochs, "pretrain warmup exceeds epochs");
  require(pretrain.mask_ratio >= 0 && pretrain.mask_ratio < 1, "pretrain mask_ratio must be in [0, 1)");
  require(pretrain.base_lr > 0 && pretrain.weight_decay >= 0, "pretrain base_lr > 0 and weight_decay >= 0");
  require(adapt.window > 0 && adapt.pyramid_width > 0 && adapt.num_classes >= 1,
          "adapt window, pyramid_width and num_classes must be >= 1");
  require(finetune.iterations > 0 && finetune.batch > 0, "finetune iterations and batch must be >= 1");
  require(finetune.lr > 0 && finetune.weight_decay >= 0, "finetune lr > 0 and weight_decay >= 0");
  require(finetune.layer_decay > 0 && finetune.layer_decay <= 1, "finetune layer_decay must be in (0, 1]");
  require(finetune.drop_path >= 0 && finetune.drop_path < 1, "finetune drop_path must be in [0, 1)");
  require(finetune.warmup_ratio > 0 && finetune.warmup_ratio <= 1, "finetune warmup_ratio must be in (0, 1]");
  require(eval_stride() <= eval_tile(), "eval stride exceeds tile");
  require(eval.iou_thresh > 0 && eval.iou_thresh <= 1, "eval iou_thresh must be in (0, 1]");
  require(data.size >= 64 && data.classes >= 1 && data.count > 0, "data needs size >= 64, classes >= 1, count >= 1");
  require(data.subsample_ratio > 0 && data.subsample_ratio <= 1, "data subsample_ratio must be in (0, 1]");
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  Section top(root, "");
  ExperimentConfig c;
  top.get("task", c.task);
  top.get("model", c.model);
  if (top.has("backbone") && !root.at("backbone").is_null()) {
    vit::BackboneConfig b;
    auto s = top.child("backbone");
    s.get("hidden", b.hidden);
    s.get("layers", b.layers);
    s.get("parallelism", b.parallelism);
    s.get("mlp", b.mlp);
    s.get("heads", b.heads);
    s.get("patch", b.patch);
    s.get("image", b.image);
    s.get("in_channels", b.in_channels);
    s.finish();
    c.backbone = b;
  } else {
    top.accept("backbone");
  }
  if (top.has("decoder")) {
    auto s = top.child("decoder");
    s.get("hidden", c.decoder.hidden);
    s.get("layers", c.decoder.layers);
    s.get("heads", c.decoder.heads);
    s.finish();
  }
  std::size_t seed = c.seed;
  top.get("seed", seed);
  c.seed = seed;
  top.get("dataset", c.dataset);
  top.get("output_dir", c.output_dir);
  top.get("checkpoint", c.checkpoint);

  const auto defaults = mae::PretrainSchedule::defaults_for(c.model);
  c.pretrain.epochs = defaults.epochs;
  c.pretrain.base_lr = defaults.base_lr;
  c.pretrain.weight_decay = defaults.weight_decay;
  c.pretrain.batch = defaults.batch;
  c.pretrain.mask_ratio = defaults.mask_ratio;
  c.pretrain.warmup_epochs = defaults.warmup_epochs;
  if (top.has("pretrain")) {
    auto s = top.child("pretrain");
    s.get("epochs", c.pretrain.epochs);
    s.get("base_lr", c.pretrain.base_lr);
    s.get("weight_decay", c.pretrain.weight_decay);
    s.get("batch", c.pretrain.batch);
    s.get("mask_ratio", c.pretrain.mask_ratio);
    s.get("warmup_epochs", c.pretrain.warmup_epochs);
    s.get("augment_side", c.pretrain.augment_side);
    s.get("augment_crop", c.pretrain.augment_crop);
    s.finish();
  }
  if (top.has("adapt")) {
    auto s = top.child("adapt");
    s.get("window", c.adapt.window);
    s.get("pyramid_width", c.adapt.pyramid_width);
    s.get("num_classes", c.adapt.num_classes);
    s.finish();
  }
  if (top.has("finetune")) {
    auto s = top.child("finetune");
    s.get("iterations", c.finetune.iterations);
    s.get("lr", c.finetune.lr);
    s.get("weight_decay", c.finetune.weight_decay);
    s.get("layer_decay", c.finetune.layer_decay);
    s.get("drop_path", c.finetune.drop_path);
    s.get("warmup_iters", c.finetune.warmup_iters);
    s.get("warmup_ratio", c.finetune.warmup_ratio);
    s.get("poly_power", c.finetune.poly_power);
    s.get("min_lr", c.finetune.min_lr);
    s.get("batch", c.finetune.batch);
    s.finish();
  }
  if (top.has("eval")) {
    auto s = top.child("eval");
    s.get("tile", c.eval.tile);
    s.get("stride", c.eval.stride);
    s.get("exclude", c.eval.exclude);
    s.get("detections", c.eval.detections);
    s.get("ground_truth", c.eval.ground_truth);
    s.get("iou_thresh", c.eval.iou_thresh);
    s.finish();
  }
  if (top.has("data")) {
    auto s = top.child("data");
    s.get("count", c.data.count);
    s.get("size", c.data.size);
    s.get("num_objects", c.data.num_objects);
    s.get("classes", c.data.classes);
    s.get("subsample_ratio", c.data.subsample_ratio);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string echo_config(const ExperimentConfig& c) {
  json j = json::object();
  j["task"] = c.task;
  j["model"] = c.model;
  if (c.backbone) {
    const auto& b = *c.backbone;
    j["backbone"] = {{"hidden", b.hidden}, {"layers", b.layers}, {"parallelism", b.parallelism}, {"mlp", b.mlp},
                     {"heads", b.heads},   {"patch", b.patch},   {"image", b.image},             {"in_channels", b.in_channels}};
  } else {
    j["backbone"] = nullptr;
  }
  j["decoder"] = {{"hidden", c.decoder.hidden}, {"layers", c.decoder.layers}, {"heads", c.decoder.heads}};
  j["seed"] = c.seed;
  j["dataset"] = c.dataset;
  j["output_dir"] = c.output_dir;
  j["checkpoint"] = c.checkpoint;
  j["pretrain"] = {{"epochs", c.pretrain.epochs},
                   {"base_lr", c.pretrain.base_lr},
                   {"weight_decay", c.pretrain.weight_decay},
                   {"batch", c.pretrain.batch},
                   {"mask_ratio", c.pretrain.mask_ratio},
                   {"warmup_epochs", c.pretrain.warmup_epochs},
                   {"augment_side", c.pretrain.augment_side},
                   {"augment_crop", c.pretrain.augment_crop}};
  j["adapt"] = {{"window", c.adapt.window},
                {"pyramid_width", c.adapt.pyramid_width},
                {"num_classes", c.adapt.num_classes}};
  j["finetune"] = {{"iterations", c.finetune.iterations}, {"lr", c.finetune.lr},
                   {"weight_decay", c.finetune.weight_decay}, {"layer_decay", c.finetune.layer_decay},
                   {"drop_path", c.finetune.drop_path},   {"warmup_iters", c.finetune.warmup_iters},
                   {"warmup_ratio", c.finetune.warmup_ratio}, {"poly_power", c.finetune.poly_power},
                   {"min_lr", c.finetune.min_lr},         {"batch", c.finetune.batch}};
  j["eval"] = {{"tile", c.eval.tile},
               {"stride", c.eval.stride},
               {"exclude", c.eval.exclude},
               {"detections", c.eval.detections},
               {"ground_truth", c.eval.ground_truth},
               {"iou_thresh", c.eval.iou_thresh}};
  j["data"] = {{"count", c.data.count},
               {"size", c.data.size},
               {"num_objects", c.data.num_objects},
               {"classes", c.data.classes},
               {"subsample_ratio", c.data.subsample_ratio}};
  return j.dump(2) + "\n";
}

}  // namespace svlb::io
