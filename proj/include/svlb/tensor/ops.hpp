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

#include <cstddef>
#include <vector>

#include "svlb/tensor/tensor.hpp"

// Differentiable operations. Each is instantiated for float (production)
// and double (gradient checking). Shapes are validated up front and
// mismatches raise DimensionError.

namespace svlb::ops {

// [m,k] x [k,n] -> [m,n]
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// [m,n] -> [n,m]
template <typename T>
Tensor<T> transpose(const Tensor<T>& x);

// Same data, new shape with equal element count.
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
// Elementwise product.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

// x[N,h] + bias[h] broadcast over rows.
template <typename T>
Tensor<T> add_row_bias(const Tensor<T>& x, const Tensor<T>& bias);

// x[N,in] W[in,out] + b[out]
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// Scalar reductions ([1]).
template <typename T>
Tensor<T> sum(const Tensor<T>& x);
template <typename T>
Tensor<T> mean(const Tensor<T>& x);

// Normalizes over the last dim, then gamma * xhat + beta.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps = T(1e-6));

// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
template <typename T>
Tensor<T> gelu(const Tensor<T>& x);

// Softmax over the last dim.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x);

// [C,H,W] -> [C,ceil(H/2),ceil(W/2)]; odd sides are zero padded right/bottom.
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x);

// [C,H,W] -> [C,H/2,W/2]; H and W must be even.
template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& x);

// x[c_in,H,W], w[c_in,c_out,2,2] -> [c_out,2H,2W], kernel 2 stride 2.
template <typename T>
Tensor<T> conv_transpose2x2(const Tensor<T>& x, const Tensor<T>& w);

// x[C,H,W] + b[C]
template <typename T>
Tensor<T> add_channel_bias(const Tensor<T>& x, const Tensor<T>& bias);

// 1x1 convolution: x[c_in,H,W], w[c_in,c_out], b[c_out] -> [c_out,H,W]
template <typename T>
Tensor<T> conv1x1(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b);

// Normalizes over channels at every spatial position of x[C,H,W] with
// per-channel affine parameters.
template <typename T>
Tensor<T> channel_layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                             T eps = T(1e-6));

// x[C,H,W] * gamma[C]
template <typename T>
Tensor<T> channel_scale(const Tensor<T>& x, const Tensor<T>& gamma);

// Normalizes each channel of x[C,H,W] over its spatial positions, then
// applies per-channel gamma and beta.
template <typename T>
Tensor<T> instance_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps = T(1e-6));

// Nearest-neighbour upsampling of x[C,H,W] by an integer factor, then crop
// to [C,out_h,out_w] (out sides must not exceed factor * input sides).
template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& x, std::size_t factor, std::size_t out_h, std::size_t out_w);

// out[i] = x[index[i]] for x[R,h]; rows may repeat.
template <typename T>
Tensor<T> select_rows(const Tensor<T>& x, const std::vector<std::size_t>& index);

// [Na,h] ++ [Nb,h] -> [Na+Nb,h]
template <typename T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b);

// Token [n,h] <-> channel-major map [h,g_h,g_w] (n == g_h * g_w).
template <typename T>
Tensor<T> tokens_to_map(const Tensor<T>& tokens, std::size_t grid_h, std::size_t grid_w);
template <typename T>
Tensor<T> map_to_tokens(const Tensor<T>& map);

// image[C,H,W] -> patches[(H/p)(W/p), p*p*C], each row ordered (py, px, c).
template <typename T>
Tensor<T> patchify(const Tensor<T>& image, std::size_t patch);
template <typename T>
Tensor<T> unpatchify(const Tensor<T>& patches, std::size_t channels, std::size_t height, std::size_t width,
                     std::size_t patch);

// Each inner vector lists token rows that attend to one another. Every
// token must belong to exactly one group.
using TokenGroups = std::vector<std::vector<std::size_t>>;

TokenGroups single_group(std::size_t tokens);

// Multi-head scaled dot-product attention on a fused projection
// qkv[N,3h] laid out as [q | k | v]. Returns [N,h]; token i attends only to
// the tokens of its group.
template <typename T>
Tensor<T> attention(const Tensor<T>& qkv, std::size_t heads, const TokenGroups& groups);

// Mean softmax cross entropy. logits[K,P] (class-major), labels[P]; pixels
// with label == ignore are skipped. Returns [1]; zero if nothing counted.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels, int ignore = -1);

}  // namespace svlb::ops
