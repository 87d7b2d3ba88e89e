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

#include <cstdint>
#include <string>
#include <vector>

#include "svlb/tensor/tensor.hpp"
#include "svlb/vit/config.hpp"

// Analytic cost model.
//
// Parameters (closed form, h = hidden, m = mlp, P = patch^2 * in_channels,
// N = grid^2):
//   embed   P*h + h
//   pos     N*h (fixed table, counted)
//   branch  4h^2 + 4h (qkv, proj) + 2hm + h + m (fc1, fc2) + 4h (two LNs)
//   blocks  layers * parallelism * branch
//   final   2h
// The MAE decoder (width d, MLP 4d) adds h*d + d (embed), d (mask token),
// N*d (pos), its blocks, 2d (norm) and d*P + P (pixel head).
//
// FLOPs (one multiply-accumulate = 2 FLOPs, softmax, norms inside blocks
// and biases ignored, t = tokens):
//   branch  2t(4h^2 + 2hm) + 2(2t^2 h)
//   embed   2tPh
//   final   2th (affine of the final LayerNorm)
//   total   layers * parallelism * branch + embed + final
//
// Memory: weights + grads + AdamW moments (two fp32 tensors) +
// activations. fp16 stores weights and grads in 2 bytes and keeps an fp32
// master copy. Activations saved per branch and sample:
//   attention  t(h + 3h + h) + heads * t^2  (LN out, qkv, context, probs)
//   mlp        t(h + 2m)                    (LN out, fc1 out, GELU out)
//   block      parallelism * branch + 2th   (stage inputs)
// Without checkpointing every block is live; with it only block inputs
// (th each) plus one live block. Both add the embed input tP and the final
// norm input th.

namespace svlb::vit {

enum class ParamScope { kEncoder, kEncoderDecoder };
enum class Precision { kFp32, kFp16 };

std::uint64_t count_params(const BackboneConfig& cfg, ParamScope scope = ParamScope::kEncoder,
                           const DecoderConfig& decoder = {});

// Every tensor (trainable or fixed) the model allocates, by name.
std::vector<std::pair<std::string, Shape>> enumerate_parameters(const BackboneConfig& cfg,
                                                                ParamScope scope = ParamScope::kEncoder,
                                                                const DecoderConfig& decoder = {});

// Accepts layers == 0 (embedding and final norm only).
std::uint64_t estimate_flops(const BackboneConfig& cfg, std::uint64_t tokens);

struct MemoryEstimate {
  std::uint64_t weights = 0;
  std::uint64_t grads = 0;
  std::uint64_t optimizer = 0;
  std::uint64_t activations = 0;

  std::uint64_t total() const { return weights + grads + optimizer + activations; }
};

MemoryEstimate estimate_memory(const BackboneConfig& cfg, std::uint64_t tokens, std::uint64_t batch,
                               Precision precision, bool checkpointing);

struct CostReport {
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
  MemoryEstimate memory;
};

CostReport analyze_cost(const BackboneConfig& cfg, std::uint64_t tokens, std::uint64_t batch, Precision precision,
                        bool checkpointing, ParamScope scope = ParamScope::kEncoder,
                        const DecoderConfig& decoder = {});

const char* to_string(Precision p);

}  // namespace svlb::vit
