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

#include "svlb/mae/mae.hpp"

#include <algorithm>
#include <cmath>

#include "svlb/error.hpp"

namespace svlb::mae {

MaskPlan make_mask_plan(std::size_t total, double ratio, const Rng& rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw ContractError("mask ratio " + std::to_string(ratio) + " not in [0, 1)");
  if (total == 0) throw ContractError("mask plan needs at least one token");
  Rng local = rng;
  const auto perm = local.permutation(total);
  const auto masked_count = static_cast<std::size_t>(std::lround(static_cast<double>(total) * ratio));
  MaskPlan plan;
  plan.total = total;
  plan.seed = rng.seed();
  plan.masked.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(masked_count));
  plan.visible.assign(perm.begin() + static_cast<std::ptrdiff_t>(masked_count), perm.end());
  if (plan.visible.empty()) throw ContractError("mask ratio " + std::to_string(ratio) + " leaves no visible token");
  std::sort(plan.masked.begin(), plan.masked.end());
  std::sort(plan.visible.begin(), plan.visible.end());
  return plan;
}

template <typename T>
MaeDecoder<T>::MaeDecoder(const vit::DecoderConfig& cfg, const vit::BackboneConfig& enc, const Rng& rng) : cfg_(cfg) {
  if (cfg.hidden == 0 || cfg.hidden > enc.hidden) {
    throw ContractError("decoder hidden " + std::to_string(cfg.hidden) + " must be in 1.." +
                        std::to_string(enc.hidden));
  }
  embed_weight_ = vit::xavier_uniform<T>(enc.hidden, cfg.hidden, rng.split("decoder.embed.weight"));
  embed_bias_ = Tensor<T>({cfg.hidden}, true);
  Rng token_rng = rng.split("decoder.mask_token");
  mask_token_ = Tensor<T>::randn({1, cfg.hidden}, token_rng, T(0.02), true);
  pos_ = vit::sincos_pos_embed<T>(enc.grid(), enc.grid(), cfg.hidden);
  stack_ = vit::TransformerStack<T>({cfg.hidden, cfg.mlp(), cfg.heads, cfg.layers, 1}, rng, "decoder.");
  pred_weight_ = vit::xavier_uniform<T>(cfg.hidden, enc.patch_dim(), rng.split("decoder.pred.weight"));
  pred_bias_ = Tensor<T>({enc.patch_dim()}, true);
}

template <typename T>
Tensor<T> MaeDecoder<T>::forward(const Tensor<T>& visible, const MaskPlan& plan, std::size_t* decoder_tokens) const {
  if (visible.dim(0) != plan.visible.size()) {
    throw ContractError("decoder: " + std::to_string(visible.dim(0)) + " encoded tokens for " +
                        std::to_string(plan.visible.size()) + " visible positions");
  }
  // restore[i] indexes the stacked [embedded visible ; mask token] rows.
  std::vector<std::size_t> restore(plan.total, plan.visible.size());
  for (std::size_t j = 0; j < plan.visible.size(); ++j) restore[plan.visible[j]] = j;
  auto embedded = ops::linear(visible, embed_weight_, embed_bias_);
  auto full = ops::select_rows(ops::concat_rows(embedded, mask_token_), restore);
  if (decoder_tokens) *decoder_tokens = full.dim(0);
  full = ops::add(full, pos_);
  auto decoded = stack_.run(full).output;
  return ops::linear(ops::select_rows(decoded, plan.masked), pred_weight_, pred_bias_);
}

template <typename T>
vit::NamedTensors<T> MaeDecoder<T>::parameters() const {
  vit::NamedTensors<T> out{{"decoder.embed.weight", embed_weight_},
                           {"decoder.embed.bias", embed_bias_},
                           {"decoder.mask_token", mask_token_}};
  stack_.collect(out);
  out.push_back({"decoder.pred.weight", pred_weight_});
  out.push_back({"decoder.pred.bias", pred_bias_});
  return out;
}

template <typename T>
vit::NamedTensors<T> MaeDecoder<T>::buffers() const {
  return {{"decoder.pos_embed", pos_}};
}

template <typename T>
MaeModel<T>::MaeModel(const vit::BackboneConfig& encoder_cfg, const vit::DecoderConfig& decoder_cfg, const Rng& rng)
    : encoder(encoder_cfg, rng), decoder(decoder_cfg, encoder_cfg, rng) {}

template <typename T>
vit::NamedTensors<T> MaeModel<T>::parameters() const {
  auto out = encoder.parameters();
  for (auto& p : decoder.parameters()) out.push_back(std::move(p));
  return out;
}

template <typename T>
vit::NamedTensors<T> MaeModel<T>::buffers() const {
  auto out = encoder.buffers();
  for (auto& p : decoder.buffers()) out.push_back(std::move(p));
  return out;
}

template <typename T>
MaeOutput<T> mae_forward(const MaeModel<T>& model, const Tensor<T>& tokens, const MaskPlan& plan) {
  if (tokens.rank() != 2 || tokens.dim(0) != plan.total) {
    throw ContractError("mae_forward: plan covers " + std::to_string(plan.total) + " tokens, got " +
                        to_string(tokens.shape()));
  }
  MaeOutput<T> out;
  auto visible = ops::select_rows(tokens, plan.visible);
  out.encoder_tokens = visible.dim(0);
  auto encoded = model.encoder.forward(visible);
  if (plan.masked.empty()) {
    out.decoder_tokens = plan.total;
    return out;
  }
  out.pred = model.decoder.forward(encoded, plan, &out.decoder_tokens);
  return out;
}

template <typename T>
MaeLoss<T> mae_loss(const Tensor<T>& pred, const Tensor<T>& target_image, const MaskPlan& plan, std::size_t patch) {
  if (plan.masked.empty()) return {Tensor<T>::scalar(T(0)), true};
  auto target = ops::patchify(target_image, patch);
  if (target.dim(0) != plan.total) {
    throw ContractError("mae_loss: target has " + std::to_string(target.dim(0)) + " patches, plan " +
                        std::to_string(plan.total));
  }
  if (!pred.defined() || pred.rank() != 2 || pred.dim(0) != plan.masked.size() || pred.dim(1) != target.dim(1)) {
    throw ContractError("mae_loss: prediction " + (pred.defined() ? to_string(pred.shape()) : std::string("none")) +
                        " does not cover " + std::to_string(plan.masked.size()) + " masked patches");
  }
  auto diff = ops::sub(pred, ops::select_rows(target, plan.masked));
  return {ops::mean(ops::mul(diff, diff)), false};
}

template class MaeDecoder<float>;
template class MaeDecoder<double>;
template struct MaeModel<float>;
template struct MaeModel<double>;
template MaeOutput<float> mae_forward(const MaeModel<float>&, const Tensor<float>&, const MaskPlan&);
template MaeOutput<double> mae_forward(const MaeModel<double>&, const Tensor<double>&, const MaskPlan&);
template MaeLoss<float> mae_loss(const Tensor<float>&, const Tensor<float>&, const MaskPlan&, std::size_t);
template MaeLoss<double> mae_loss(const Tensor<double>&, const Tensor<double>&, const MaskPlan&, std::size_t);

}  // namespace svlb::mae
