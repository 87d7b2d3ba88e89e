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

#include "svlb/vit/cost.hpp"

#include "svlb/error.hpp"

namespace svlb::vit {

namespace {

std::uint64_t stack_params(std::uint64_t h, std::uint64_t m, std::uint64_t layers, std::uint64_t parallelism) {
  const std::uint64_t branch = 4 * h * h + 4 * h + 2 * h * m + h + m + 2 * 2 * h;
  return layers * parallelism * branch + 2 * h;
}

void enumerate_stack(std::vector<std::pair<std::string, Shape>>& out, const std::string& prefix, std::size_t h,
                     std::size_t m, std::size_t layers, std::size_t parallelism) {
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t i = 0; i < parallelism; ++i) {
      const std::string base = prefix + "blocks." + std::to_string(l) + ".branches." + std::to_string(i) + ".";
      out.push_back({base + "attn_norm.gamma", {h}});
      out.push_back({base + "attn_norm.beta", {h}});
      out.push_back({base + "qkv.weight", {h, 3 * h}});
      out.push_back({base + "qkv.bias", {3 * h}});
      out.push_back({base + "proj.weight", {h, h}});
      out.push_back({base + "proj.bias", {h}});
      out.push_back({base + "mlp_norm.gamma", {h}});
      out.push_back({base + "mlp_norm.beta", {h}});
      out.push_back({base + "fc1.weight", {h, m}});
      out.push_back({base + "fc1.bias", {m}});
      out.push_back({base + "fc2.weight", {m, h}});
      out.push_back({base + "fc2.bias", {h}});
    }
  }
  out.push_back({prefix + "norm.gamma", {h}});
  out.push_back({prefix + "norm.beta", {h}});
}

}  // namespace

std::uint64_t count_params(const BackboneConfig& cfg, ParamScope scope, const DecoderConfig& decoder) {
  const std::uint64_t h = cfg.hidden, p = cfg.patch_dim(), n = cfg.tokens();
  std::uint64_t total = p * h + h + n * h + stack_params(h, cfg.mlp, cfg.layers, cfg.parallelism);
  if (scope == ParamScope::kEncoderDecoder) {
    const std::uint64_t d = decoder.hidden;
    total += h * d + d + d + n * d + stack_params(d, decoder.mlp(), decoder.layers, 1) + d * p + p;
  }
  return total;
}

std::vector<std::pair<std::string, Shape>> enumerate_parameters(const BackboneConfig& cfg, ParamScope scope,
                                                                const DecoderConfig& decoder) {
  const std::size_t h = cfg.hidden, p = cfg.patch_dim(), n = cfg.tokens();
  std::vector<std::pair<std::string, Shape>> out{
      {"patch_embed.weight", {p, h}}, {"patch_embed.bias", {h}}, {"pos_embed", {n, h}}};
  enumerate_stack(out, "encoder.", h, cfg.mlp, cfg.layers, cfg.parallelism);
  if (scope == ParamScope::kEncoderDecoder) {
    const std::size_t d = decoder.hidden;
    out.push_back({"decoder.embed.weight", {h, d}});
    out.push_back({"decoder.embed.bias", {d}});
    out.push_back({"decoder.mask_token", {1, d}});
    out.push_back({"decoder.pos_embed", {n, d}});
    enumerate_stack(out, "decoder.", d, decoder.mlp(), decoder.layers, 1);
    out.push_back({"decoder.pred.weight", {d, p}});
    out.push_back({"decoder.pred.bias", {p}});
  }
  return out;
}

std::uint64_t estimate_flops(const BackboneConfig& cfg, std::uint64_t tokens) {
  if (tokens == 0) throw ContractError("estimate_flops: tokens must be >= 1");
  const std::uint64_t h = cfg.hidden, m = cfg.mlp, t = tokens;
  const std::uint64_t branch = 2 * t * (4 * h * h + 2 * h * m) + 2 * (2 * t * t * h);
  const std::uint64_t embed = 2 * t * cfg.patch_dim() * h;
  const std::uint64_t final_norm = 2 * t * h;
  return cfg.layers * cfg.parallelism * branch + embed + final_norm;
}

MemoryEstimate estimate_memory(const BackboneConfig& cfg, std::uint64_t tokens, std::uint64_t batch,
                               Precision precision, bool checkpointing) {
  if (batch == 0) throw ContractError("estimate_memory: batch must be >= 1");
  if (tokens == 0) throw ContractError("estimate_memory: tokens must be >= 1");
  const std::uint64_t bytes = precision == Precision::kFp32 ? 4 : 2;
  const std::uint64_t params = count_params(cfg);
  MemoryEstimate est;
  est.weights = params * bytes + (precision == Precision::kFp16 ? params * 4 : 0);
  est.grads = params * bytes;
  est.optimizer = params * 4 * 2;

  const std::uint64_t h = cfg.hidden, m = cfg.mlp, t = tokens;
  const std::uint64_t branch = t * (5 * h) + cfg.heads * t * t + t * (h + 2 * m);
  const std::uint64_t block = cfg.parallelism * branch + 2 * t * h;
  const std::uint64_t edges = t * cfg.patch_dim() + t * h;
  const std::uint64_t per_sample = checkpointing ? cfg.layers * t * h + block + edges : cfg.layers * block + edges;
  est.activations = batch * bytes * per_sample;
  return est;
}

CostReport analyze_cost(const BackboneConfig& cfg, std::uint64_t tokens, std::uint64_t batch, Precision precision,
                        bool checkpointing, ParamScope scope, const DecoderConfig& decoder) {
  return {count_params(cfg, scope, decoder), estimate_flops(cfg, tokens),
          estimate_memory(cfg, tokens, batch, precision, checkpointing)};
}

const char* to_string(Precision p) { return p == Precision::kFp32 ? "fp32" : "fp16"; }

}  // namespace svlb::vit
