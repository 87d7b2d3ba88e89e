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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include "svlb/data/subsample.hpp"
#include "svlb/data/synth.hpp"
#include "svlb/data/tiling.hpp"
#include "svlb/error.hpp"
#include "svlb/heads/segmentation.hpp"
#include "svlb/io/bytes.hpp"
#include "svlb/io/checkpoint.hpp"
#include "svlb/io/config.hpp"
#include "svlb/io/dataset.hpp"
#include "svlb/io/manifest.hpp"
#include "svlb/io/raster.hpp"
#include "svlb/mae/pretrain.hpp"
#include "svlb/metrics/detection.hpp"
#include "svlb/vit/cost.hpp"

namespace fs = std::filesystem;

namespace svlb {
namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;

// Flags shared by every stage; unset flags leave the config file's values.
struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string model;
  std::string dataset;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config (JSON)");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--seed", f.seed, "top-level seed");
  cmd->add_option("--model", f.model, "model name, e.g. ViT-B12x1");
  cmd->add_option("--dataset", f.dataset, "dataset directory written by `svlb synth`");
}

// Raised for anything wrong with the resolved configuration (exit 2).
struct ConfigFailure : Error {
  using Error::Error;
};

io::ExperimentConfig resolve_config(const std::string& task, const CommonFlags& f) try {
  auto c = f.config_path.empty() ? io::parse_config("{}") : io::load_config(f.config_path);
  c.task = task;
  if (!f.model.empty()) c.model = f.model;
  if (!f.out_dir.empty()) c.output_dir = f.out_dir;
  if (f.seed) c.seed = *f.seed;
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (!f.checkpoint.empty()) c.checkpoint = f.checkpoint;
  c.validate();
  return c;
} catch (const Error& e) {
  throw ConfigFailure(e.what());
}

fs::path prepare_out(const io::ExperimentConfig& c) {
  fs::path out(c.output_dir);
  fs::create_directories(out);
  io::write_file((out / "config.json").string(), io::echo_config(c));
  return out;
}

void finish_out(const fs::path& out) { io::write_manifest(out.string()); }

data::SceneSpec scene_spec(const io::ExperimentConfig& c) {
  data::SceneSpec s;
  s.size = c.data.size;
  s.num_objects = c.data.num_objects;
  s.classes = c.data.classes;
  return s;
}

// The dataset directory when set, else synthetic scenes from `stream`.
std::vector<data::SceneSample> load_scenes(const io::ExperimentConfig& c, const Rng& root, const char* stream) {
  if (!c.dataset.empty()) return io::read_dataset(c.dataset);
  return data::synth_dataset(c.data.count, scene_spec(c), root.split(stream));
}

heads::SegModelConfig seg_config(const io::ExperimentConfig& c) {
  heads::SegModelConfig s;
  s.backbone = c.resolved_backbone();
  s.attention.window = c.adapt.window;
  s.pyramid_width = c.adapt.pyramid_width;
  s.num_classes = c.adapt.num_classes;
  return s;
}

vit::NamedTensors<float> state_of(const heads::SegModel<float>& m) {
  auto all = m.parameters();
  for (auto& b : m.buffers()) all.push_back(b);
  return all;
}

io::LoadReport load_into(const std::string& path, const heads::SegModel<float>& model) {
  return io::apply_checkpoint(io::load_checkpoint(path), state_of(model));
}

std::string human_count(std::uint64_t n) {
  char buf[32];
  if (n >= 1000000000ull) {
    std::snprintf(buf, sizeof buf, "%.2fB", static_cast<double>(n) / 1e9);
  } else {
    std::snprintf(buf, sizeof buf, "%.2fM", static_cast<double>(n) / 1e6);
  }
  return buf;
}

struct AnalyzeFlags {
  std::vector<std::string> models;
  std::uint64_t tokens = 0;
  std::uint64_t batch = 1;
  std::string precision = "fp32";
  bool checkpointing = false;
  bool with_decoder = false;
  std::string out_dir;
};

int run_analyze(const AnalyzeFlags& f) {
  const auto models = f.models.empty() ? vit::registered_models() : f.models;
  const auto precision = f.precision == "fp16" ? vit::Precision::kFp16 : vit::Precision::kFp32;
  const auto scope = f.with_decoder ? vit::ParamScope::kEncoderDecoder : vit::ParamScope::kEncoder;
  std::string csv = "model,params,flops,weights_bytes,grads_bytes,optimizer_bytes,activation_bytes,total_bytes\n";
  std::printf("%-12s %12s %9s %18s %16s\n", "model", "params", "", "flops", "memory_bytes");
  for (const auto& name : models) {
    const auto cfg = vit::parse_model_name(name);
    const auto tokens = f.tokens ? f.tokens : cfg.tokens();
    const auto r = vit::analyze_cost(cfg, tokens, f.batch, precision, f.checkpointing, scope);
    std::printf("%-12s %12llu %9s %18llu %16llu\n", name.c_str(), static_cast<unsigned long long>(r.params),
                human_count(r.params).c_str(), static_cast<unsigned long long>(r.flops),
                static_cast<unsigned long long>(r.memory.total()));
    csv += name + "," + std::to_string(r.params) + "," + std::to_string(r.flops) + "," +
           std::to_string(r.memory.weights) + "," + std::to_string(r.memory.grads) + "," +
           std::to_string(r.memory.optimizer) + "," + std::to_string(r.memory.activations) + "," +
           std::to_string(r.memory.total()) + "\n";
  }
  if (!f.out_dir.empty()) {
    fs::create_directories(f.out_dir);
    io::write_file((fs::path(f.out_dir) / "cost.csv").string(), csv);
    finish_out(f.out_dir);
  }
  return 0;
}

int run_synth(const io::ExperimentConfig& c) {
  const auto out = prepare_out(c);
  const auto scenes = data::synth_dataset(c.data.count, scene_spec(c), Rng(c.seed).split("data"));
  io::write_dataset(out.string(), scenes);
  finish_out(out);
  std::printf("synth: wrote %zu scenes to %s\n", scenes.size(), out.string().c_str());
  return 0;
}

int run_pretrain(const io::ExperimentConfig& c) {
  const Rng root(c.seed);
  const auto enc = c.resolved_backbone();
  const auto scenes = load_scenes(c, root, "data");
  std::vector<TensorF> images;
  for (const auto& s : scenes) images.push_back(s.image);

  mae::MaeModel<float> model(enc, c.decoder, root.split("init"));
  mae::PretrainOptions opts;
  opts.augment.out_side = c.pretrain.augment_side ? c.pretrain.augment_side : enc.image;
  opts.augment.crop = c.pretrain.augment_crop;
  opts.on_epoch = [](std::size_t epoch, double loss) { std::fprintf(stderr, "epoch %zu loss %.6f\n", epoch + 1, loss); };
  const auto result = mae::pretrain(model, c.pretrain_schedule(), images, root.split("pretrain"), opts);

  const auto out = prepare_out(c);
  auto state = model.parameters();
  for (auto& b : model.buffers()) state.push_back(b);
  io::save_checkpoint(io::make_checkpoint(state, io::echo_config(c)), (out / "pretrain.svlb").string());
  io::write_file((out / "loss_curve.csv").string(), mae::loss_curve_csv(result.epoch_loss));
  finish_out(out);
  std::printf("pretrain: %zu epochs, final loss %.6f%s\n", result.epoch_loss.size(),
              result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back(),
              result.degenerate_loss ? " (nothing masked)" : "");
  return 0;
}

int run_adapt(const io::ExperimentConfig& c) {
  if (c.checkpoint.empty()) throw ContractError("adapt: a pretraining checkpoint is required (--checkpoint)");
  heads::SegModel<float> model(seg_config(c), Rng(c.seed).split("init"));
  const auto report = load_into(c.checkpoint, model);
  const auto out = prepare_out(c);
  io::save_checkpoint(io::make_checkpoint(state_of(model), io::echo_config(c)), (out / "adapted.svlb").string());
  io::write_file((out / "load_report.txt").string(), io::load_report_text(report));
  finish_out(out);
  std::printf("adapt: %zu loaded, %zu initialized, %zu unused\n", report.loaded.size(), report.initialized.size(),
              report.unused.size());
  return 0;
}

std::string ids_text(const std::vector<data::SceneSample>& scenes, const std::vector<std::size_t>& idx) {
  std::string s;
  for (auto i : idx) s += scenes[i].id + "\n";
  return s;
}

int run_finetune(const io::ExperimentConfig& c) {
  const Rng root(c.seed);
  heads::SegModel<float> model(seg_config(c), root.split("init"));
  if (!c.checkpoint.empty()) load_into(c.checkpoint, model);
  const auto scenes = load_scenes(c, root, "data");
  const auto idx = data::subsample_indices(scenes.size(), c.data.subsample_ratio, root.split("subsample"));
  std::vector<heads::SegSample> train;
  for (auto i : idx) {
    scenes[i].mask.validate(c.adapt.num_classes);
    train.push_back({scenes[i].image, scenes[i].mask});
  }

  auto sched = vitdet::FinetuneSchedule::segmentation(c.finetune.iterations);
  sched.lr = c.finetune.lr;
  sched.weight_decay = c.finetune.weight_decay;
  sched.layer_decay = c.finetune.layer_decay;
  sched.drop_path = c.finetune.drop_path;
  sched.warmup_iters = c.finetune.warmup_iters;
  sched.warmup_ratio = c.finetune.warmup_ratio;
  sched.poly_power = c.finetune.poly_power;
  sched.min_lr = c.finetune.min_lr;
  heads::FinetuneOptions opts;
  opts.batch = c.finetune.batch;
  const auto result = heads::finetune_segmentation(model, sched, train, root.split("finetune"), opts);

  const auto out = prepare_out(c);
  io::save_checkpoint(io::make_checkpoint(state_of(model), io::echo_config(c)), (out / "finetuned.svlb").string());
  io::write_file((out / "train_loss.csv").string(), heads::iteration_loss_csv(result.iteration_loss));
  io::write_file((out / "subset.txt").string(), ids_text(scenes, idx));
  finish_out(out);
  std::printf("finetune-seg: %zu iterations on %zu samples, final loss %.6f\n", result.iteration_loss.size(),
              train.size(), result.iteration_loss.back());
  return 0;
}

struct EvalFlags {
  std::string detections;
  std::string ground_truth;
};

// A file is one image; a directory pairs files by name, and ground truth
// without a detection file counts as an image with no detections.
std::vector<metrics::ImageBoxes> load_box_pairs(const std::string& det, const std::string& gt) {
  if (!fs::is_directory(gt)) {
    return {{metrics::parse_boxes(io::read_file(det), true), metrics::parse_boxes(io::read_file(gt), false)}};
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(gt)) {
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  std::vector<metrics::ImageBoxes> out;
  for (const auto& n : names) {
    metrics::ImageBoxes ib;
    ib.ground_truth = metrics::parse_boxes(io::read_file((fs::path(gt) / n).string()), false);
    if (const auto d = fs::path(det) / n; fs::exists(d)) ib.detections = metrics::parse_boxes(io::read_file(d.string()), true);
    out.push_back(std::move(ib));
  }
  return out;
}

int run_eval(io::ExperimentConfig c, const EvalFlags& f) {
  if (!f.detections.empty()) c.eval.detections = f.detections;
  if (!f.ground_truth.empty()) c.eval.ground_truth = f.ground_truth;

  if (!c.eval.detections.empty() || !c.eval.ground_truth.empty()) {
    if (c.eval.detections.empty() || c.eval.ground_truth.empty()) {
      throw ContractError("eval: detection mode needs both --detections and --ground-truth");
    }
    const auto report = metrics::match_and_ap(load_box_pairs(c.eval.detections, c.eval.ground_truth), c.eval.iou_thresh);
    const auto out = prepare_out(c);
    io::write_file((out / "ap_report.csv").string(), metrics::ap_report_csv(report));
    finish_out(out);
    std::printf("eval: mAP %.6f over %zu classes\n", report.mean_ap, report.ap.size());
    return 0;
  }

  if (c.checkpoint.empty()) throw ContractError("eval: segmentation mode needs a model checkpoint (--checkpoint)");
  const Rng root(c.seed);
  heads::SegModel<float> model(seg_config(c), root.split("init"));
  load_into(c.checkpoint, model);
  const auto scenes = load_scenes(c, root, "eval_data");
  const data::TileModel tile_model = [&model](const TensorF& tile) {
    NoGradGuard guard;
    return model.logits(tile);
  };

  const auto out = prepare_out(c);
  fs::create_directories(out / "predictions");
  metrics::ConfusionMatrix cm(c.adapt.num_classes);
  for (const auto& s : scenes) {
    s.mask.validate(c.adapt.num_classes);
    const auto pred = heads::argmax_map(data::sliding_infer(tile_model, s.image, c.eval_tile(), c.eval_stride()));
    io::write_labels((out / "predictions" / (s.id + ".svlr")).string(), pred);
    cm.add(pred, s.mask);
  }
  const std::set<int> exclude(c.eval.exclude.begin(), c.eval.exclude.end());
  const auto report = metrics::seg_metrics(cm, exclude);
  io::write_file((out / "seg_report.csv").string(), metrics::seg_report_csv(report));
  finish_out(out);
  std::printf("eval: mIoU %.6f mF1 %.6f OA %.6f\n", report.mean_iou, report.mean_f1, report.overall_accuracy);
  return 0;
}

int run_subsample(io::ExperimentConfig c, std::optional<double> ratio) {
  if (ratio) {
    c.data.subsample_ratio = *ratio;
    c.validate();
  }
  const Rng root(c.seed);
  const auto scenes = load_scenes(c, root, "data");
  const auto idx = data::subsample_indices(scenes.size(), c.data.subsample_ratio, root.split("subsample"));
  const auto out = prepare_out(c);
  io::write_file((out / "subset.txt").string(), ids_text(scenes, idx));
  io::write_file((out / "instances.csv").string(), data::distribution_csv(data::instance_distribution(scenes, idx)));
  io::write_file((out / "pixels.csv").string(), data::distribution_csv(data::pixel_distribution(scenes, idx)));
  finish_out(out);
  std::printf("subsample: %zu of %zu images\n", idx.size(), scenes.size());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"svlb: masked-autoencoder pretraining and dense-prediction adaptation for plain ViTs"};
  app.require_subcommand(1);

  AnalyzeFlags af;
  auto* analyze = app.add_subcommand("analyze", "print parameter, FLOP and memory estimates for named models");
  analyze->add_option("models", af.models, "model names (default: the registered models)");
  analyze->add_option("--tokens", af.tokens, "tokens per image (default: the model's grid)");
  analyze->add_option("--batch", af.batch, "batch size for the memory estimate");
  analyze->add_option("--precision", af.precision, "fp32 or fp16")->check(CLI::IsMember({"fp32", "fp16"}));
  analyze->add_flag("--checkpointing", af.checkpointing, "activation checkpointing");
  analyze->add_flag("--with-decoder", af.with_decoder, "include the pretraining decoder");
  analyze->add_option("--out-dir", af.out_dir, "also write cost.csv here");

  CommonFlags synth_f, pre_f, adapt_f, ft_f, eval_f, sub_f;
  auto* synth = app.add_subcommand("synth", "write a synthetic scene dataset");
  add_common(synth, synth_f);
  std::optional<std::size_t> count, size, objects;
  std::optional<int> classes;
  synth->add_option("--count", count, "number of scenes");
  synth->add_option("--size", size, "image side in pixels (>= 64)");
  synth->add_option("--objects", objects, "objects per scene");
  synth->add_option("--classes", classes, "object classes");

  auto* pretrain = app.add_subcommand("pretrain", "masked-autoencoder pretraining");
  add_common(pretrain, pre_f);

  auto* adapt = app.add_subcommand("adapt", "load a pretraining checkpoint into the adapted segmentation model");
  add_common(adapt, adapt_f);
  adapt->add_option("--checkpoint", adapt_f.checkpoint, "pretraining checkpoint");

  auto* finetune = app.add_subcommand("finetune-seg", "fine-tune the adapted model for segmentation");
  add_common(finetune, ft_f);
  finetune->add_option("--checkpoint", ft_f.checkpoint, "initial checkpoint (default: random init)");

  EvalFlags ef;
  auto* eval = app.add_subcommand("eval", "segmentation metrics for a checkpoint, or AP for box files");
  add_common(eval, eval_f);
  eval->add_option("--checkpoint", eval_f.checkpoint, "segmentation checkpoint");
  eval->add_option("--detections", ef.detections, "detection file or directory");
  eval->add_option("--ground-truth", ef.ground_truth, "ground-truth file or directory");

  std::optional<double> ratio;
  auto* subsample = app.add_subcommand("subsample", "select a seeded subset and report its class distribution");
  add_common(subsample, sub_f);
  subsample->add_option("--ratio", ratio, "fraction of images, in (0, 1]");

  if (argc > 1 && argv[1][0] != '-' && app.get_subcommands([&](CLI::App* sub) { return sub->get_name() == argv[1]; }).empty()) {
    std::cerr << "svlb: error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
    return kExitConfig;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "svlb: error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  if (*analyze) return run_analyze(af);
  if (*synth) {
    auto c = resolve_config("synth", synth_f);
    if (count) c.data.count = *count;
    if (size) c.data.size = *size;
    if (objects) c.data.num_objects = *objects;
    if (classes) c.data.classes = *classes;
    c.validate();
    return run_synth(c);
  }
  if (*pretrain) return run_pretrain(resolve_config("pretrain", pre_f));
  if (*adapt) return run_adapt(resolve_config("adapt", adapt_f));
  if (*finetune) return run_finetune(resolve_config("finetune-seg", ft_f));
  if (*eval) return run_eval(resolve_config("eval", eval_f), ef);
  return run_subsample(resolve_config("subsample", sub_f), ratio);
}

}  // namespace
}  // namespace svlb

int main(int argc, char** argv) {
  try {
    return svlb::run(argc, argv);
  } catch (const svlb::DivergenceError& e) {
    std::cerr << "svlb: diverged: " << e.what() << "\n";
    return svlb::kExitDivergence;
  } catch (const svlb::ConfigFailure& e) {
    std::cerr << "svlb: config error: " << e.what() << "\n";
    return svlb::kExitConfig;
  } catch (const svlb::ContractError& e) {
    std::cerr << "svlb: config error: " << e.what() << "\n";
    return svlb::kExitConfig;
  } catch (const svlb::UnsupportedConfigError& e) {
    std::cerr << "svlb: config error: " << e.what() << "\n";
    return svlb::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "svlb: error: " << e.what() << "\n";
    return svlb::kExitFailure;
  }
}
