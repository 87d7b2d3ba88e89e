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

#include "svlb/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "svlb/error.hpp"
#include "svlb/tensor/kernels.hpp"

namespace svlb::ops {

namespace {

template <typename T>
using Node = typename Tensor<T>::Node;

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

template <typename T>
void require_rank(const Tensor<T>& x, std::size_t rank, const char* op) {
  require(x.defined() && x.rank() == rank,
          std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
              (x.defined() ? to_string(x.shape()) : "undefined"));
}

template <typename N>
bool wants(const N& self, std::size_t i) {
  return self.parents[i]->requires_grad;
}

template <typename N>
auto& grad_of(N& self, std::size_t i) {
  return self.parents[i]->ensure_grad();
}

template <typename N>
const auto& data_of(const N& self, std::size_t i) {
  return self.parents[i]->data;
}

template <typename T>
std::vector<T> transposed(const T* src, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  require(b.dim(0) == k, "matmul: inner dims disagree " + to_string(a.shape()) + " x " + to_string(b.shape()));
  std::vector<T> out(m * n, T(0));
  kernels::gemm_acc(m, n, k, a.data().data(), b.data().data(), out.data());
  return Tensor<T>::make_result({m, n}, std::move(out), {a, b}, [m, n, k](Node<T>& self) {
    const auto& g = self.grad;
    if (wants(self, 0)) {
      auto bt = transposed(data_of(self, 1).data(), k, n);
      kernels::gemm_acc(m, k, n, g.data(), bt.data(), grad_of(self, 0).data());
    }
    if (wants(self, 1)) {
      auto at = transposed(data_of(self, 0).data(), m, k);
      kernels::gemm_acc(k, n, m, at.data(), g.data(), grad_of(self, 1).data());
    }
  });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  require_rank(x, 2, "transpose");
  const std::size_t r = x.dim(0), c = x.dim(1);
  return Tensor<T>::make_result({c, r}, transposed(x.data().data(), r, c), {x}, [r, c](Node<T>& self) {
    auto gt = transposed(self.grad.data(), c, r);
    kernels::table<T>().accumulate(gt.size(), gt.data(), grad_of(self, 0).data());
  });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  require(numel(shape) == x.numel(), "reshape: " + to_string(x.shape()) + " -> " + to_string(shape));
  std::vector<T> v(x.data().begin(), x.data().end());
  return Tensor<T>::make_result(std::move(shape), std::move(v), {x}, [](Node<T>& self) {
    kernels::table<T>().accumulate(self.grad.size(), self.grad.data(), grad_of(self, 0).data());
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "add: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  std::vector<T> out(a.numel());
  kernels::table<T>().add(out.size(), a.data().data(), b.data().data(), out.data());
  return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    const auto& k = kernels::table<T>();
    for (std::size_t i = 0; i < 2; ++i) {
      if (wants(self, i)) k.accumulate(self.grad.size(), self.grad.data(), grad_of(self, i).data());
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "sub: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  std::vector<T> out(a.numel());
  const auto& ad = a.data();
  const auto& bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] - bd[i];
  return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    const auto& k = kernels::table<T>();
    if (wants(self, 0)) k.accumulate(self.grad.size(), self.grad.data(), grad_of(self, 0).data());
    if (wants(self, 1)) k.axpy(self.grad.size(), T(-1), self.grad.data(), grad_of(self, 1).data());
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), "mul: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  std::vector<T> out(a.numel());
  kernels::table<T>().mul(out.size(), a.data().data(), b.data().data(), out.data());
  return Tensor<T>::make_result(a.shape(), std::move(out), {a, b}, [](Node<T>& self) {
    const auto& k = kernels::table<T>();
    std::vector<T> tmp(self.grad.size());
    for (std::size_t i = 0; i < 2; ++i) {
      if (!wants(self, i)) continue;
      k.mul(tmp.size(), self.grad.data(), data_of(self, 1 - i).data(), tmp.data());
      k.accumulate(tmp.size(), tmp.data(), grad_of(self, i).data());
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.numel());
  kernels::table<T>().scale(out.size(), factor, x.data().data(), out.data());
  return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [factor](Node<T>& self) {
    kernels::table<T>().axpy(self.grad.size(), factor, self.grad.data(), grad_of(self, 0).data());
  });
}

template <typename T>
Tensor<T> add_row_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  require_rank(x, 2, "add_row_bias");
  const std::size_t rows = x.dim(0), h = x.dim(1);
  require(bias.numel() == h, "add_row_bias: bias " + to_string(bias.shape()) + " for rows of " + std::to_string(h));
  std::vector<T> out(x.numel());
  const auto& k = kernels::table<T>();
  for (std::size_t r = 0; r < rows; ++r) k.add(h, x.data().data() + r * h, bias.data().data(), out.data() + r * h);
  return Tensor<T>::make_result(x.shape(), std::move(out), {x, bias}, [rows, h](Node<T>& self) {
    const auto& k = kernels::table<T>();
    if (wants(self, 0)) k.accumulate(self.grad.size(), self.grad.data(), grad_of(self, 0).data());
    if (wants(self, 1)) {
      auto& gb = grad_of(self, 1);
      for (std::size_t r = 0; r < rows; ++r) k.accumulate(h, self.grad.data() + r * h, gb.data());
    }
  });
}

template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  return add_row_bias(matmul(x, weight), bias);
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T s(0);
  for (T v : x.data()) s += v;
  return Tensor<T>::make_result({1}, {s}, {x}, [](Node<T>& self) {
    auto& gx = grad_of(self, 0);
    const T g = self.grad[0];
    for (auto& v : gx) v += g;
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  require(x.defined() && x.rank() >= 1, "layer_norm: undefined input");
  const std::size_t h = x.shape().back();
  require(gamma.numel() == h && beta.numel() == h,
          "layer_norm: last dim " + std::to_string(h) + " vs gamma " + to_string(gamma.shape()) + " beta " +
              to_string(beta.shape()));
  const std::size_t rows = x.numel() / h;
  std::vector<T> out(x.numel());
  std::vector<T> xhat(x.numel());
  std::vector<T> rstd(rows);
  const auto xd = x.data();
  const auto gd = gamma.data();
  const auto bd = beta.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xd.data() + r * h;
    T mu(0);
    for (std::size_t j = 0; j < h; ++j) mu += xr[j];
    mu /= static_cast<T>(h);
    T var(0);
    for (std::size_t j = 0; j < h; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= static_cast<T>(h);
    const T rs = T(1) / std::sqrt(var + eps);
    rstd[r] = rs;
    for (std::size_t j = 0; j < h; ++j) {
      const T xh = (xr[j] - mu) * rs;
      xhat[r * h + j] = xh;
      out[r * h + j] = gd[j] * xh + bd[j];
    }
  }
  return Tensor<T>::make_result(
      x.shape(), std::move(out), {x, gamma, beta},
      [rows, h, xhat = std::move(xhat), rstd = std::move(rstd)](Node<T>& self) {
        const auto& g = self.grad;
        const auto& gam = data_of(self, 1);
        if (wants(self, 1)) {
          auto& gg = grad_of(self, 1);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < h; ++j) gg[j] += g[r * h + j] * xhat[r * h + j];
        }
        if (wants(self, 2)) {
          auto& gb = grad_of(self, 2);
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < h; ++j) gb[j] += g[r * h + j];
        }
        if (wants(self, 0)) {
          auto& gx = grad_of(self, 0);
          std::vector<T> dxh(h);
          for (std::size_t r = 0; r < rows; ++r) {
            T m1(0), m2(0);
            for (std::size_t j = 0; j < h; ++j) {
              dxh[j] = g[r * h + j] * gam[j];
              m1 += dxh[j];
              m2 += dxh[j] * xhat[r * h + j];
            }
            m1 /= static_cast<T>(h);
            m2 /= static_cast<T>(h);
            for (std::size_t j = 0; j < h; ++j) gx[r * h + j] += rstd[r] * (dxh[j] - m1 - xhat[r * h + j] * m2);
          }
        }
      });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& x) {
  const T c = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  const T a = T(0.044715);
  std::vector<T> out(x.numel());
  const auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T v = xd[i];
    out[i] = T(0.5) * v * (T(1) + std::tanh(c * (v + a * v * v * v)));
  }
  return Tensor<T>::make_result(x.shape(), std::move(out), {x}, [c, a](Node<T>& self) {
    const auto& xv = data_of(self, 0);
    auto& gx = grad_of(self, 0);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const T v = xv[i];
      const T t = std::tanh(c * (v + a * v * v * v));
      const T d = T(0.5) * (T(1) + t) + T(0.5) * v * (T(1) - t * t) * c * (T(1) + T(3) * a * v * v);
      gx[i] += self.grad[i] * d;
    }
  });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  require(x.defined() && x.rank() >= 1, "softmax: undefined input");
  const std::size_t n = x.shape().back();
  const std::size_t rows = x.numel() / n;
  std::vector<T> out(x.numel());
  const auto xd = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xd.data() + r * n;
    T* yr = out.data() + r * n;
    const T mx = *std::max_element(xr, xr + n);
    T s(0);
    for (std::size_t j = 0; j < n; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      s += yr[j];
    }
    for (std::size_t j = 0; j < n; ++j) yr[j] /= s;
  }
  return Tensor<T>::make_result(x.shape(), out, {x}, [rows, n, y = out](Node<T>& self) {
    auto& gx = grad_of(self, 0);
    for (std::size_t r = 0; r < rows; ++r) {
      T dot(0);
      for (std::size_t j = 0; j < n; ++j) dot += self.grad[r * n + j] * y[r * n + j];
      for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += y[r * n + j] * (self.grad[r * n + j] - dot);
    }
  });
}

template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& x) {
  require_rank(x, 3, "max_pool2d");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const std::size_t oh = (h + 1) / 2, ow = (w + 1) / 2;
  std::vector<T> out(c * oh * ow);
  // Flat source index of each winner; npos when a zero pad cell won.
  constexpr std::size_t kPad = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> argmax(out.size());
  const auto xd = x.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        T best = -std::numeric_limits<T>::infinity();
        std::size_t arg = kPad;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t y = 2 * oy + dy, xx = 2 * ox + dx;
            T v(0);
            std::size_t src = kPad;
            if (y < h && xx < w) {
              src = (ch * h + y) * w + xx;
              v = xd[src];
            }
            if (v > best) {
              best = v;
              arg = src;
            }
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        out[o] = best;
        argmax[o] = arg;
      }
    }
  }
  return Tensor<T>::make_result({c, oh, ow}, std::move(out), {x}, [argmax = std::move(argmax)](Node<T>& self) {
    auto& gx = grad_of(self, 0);
    for (std::size_t o = 0; o < argmax.size(); ++o) {
      if (argmax[o] != kPad) gx[argmax[o]] += self.grad[o];
    }
  });
}

template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& x) {
  require_rank(x, 3, "avg_pool2d");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  require(h % 2 == 0 && w % 2 == 0, "avg_pool2d: spatial dims must be even, got " + to_string(x.shape()));
  const std::size_t oh = h / 2, ow = w / 2;
  std::vector<T> out(c * oh * ow);
  const auto xd = x.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t b = (ch * h + 2 * oy) * w + 2 * ox;
        out[(ch * oh + oy) * ow + ox] = T(0.25) * (xd[b] + xd[b + 1] + xd[b + w] + xd[b + w + 1]);
      }
  return Tensor<T>::make_result({c, oh, ow}, std::move(out), {x}, [c, h, w, oh, ow](Node<T>& self) {
    auto& gx = grad_of(self, 0);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t oy = 0; oy < oh; ++oy)
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const T g = T(0.25) * self.grad[(ch * oh + oy) * ow + ox];
          const std::size_t b = (ch * h + 2 * oy) * w + 2 * ox;
          gx[b] += g;
          gx[b + 1] += g;
          gx[b + w] += g;
          gx[b + w + 1] += g;
        }
  });
}

template <typename T>
Tensor<T> conv_transpose2x2(const Tensor<T>& x, const Tensor<T>& w) {
  require_rank(x, 3, "conv_transpose2x2");
  require_rank(w, 4, "conv_transpose2x2 weight");
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  require(w.dim(0) == cin && w.dim(2) == 2 && w.dim(3) == 2,
          "conv_transpose2x2: weight " + to_string(w.shape()) + " for input " + to_string(x.shape()));
  const std::size_t cout = w.dim(1), hw = h * wd, k4 = cout * 4;
  // z[co*4 + a*2 + b, pos] = sum_ci w[ci, co, a, b] * x[ci, pos]
  auto wt = transposed(w.data().data(), cin, k4);
  std::vector<T> z(k4 * hw, T(0));
  kernels::gemm_acc(k4, hw, cin, wt.data(), x.data().data(), z.data());
  const std::size_t oh = 2 * h, ow = 2 * wd;
  std::vector<T> out(cout * oh * ow);
  for (std::size_t co = 0; co < cout; ++co)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        const T* zr = z.data() + (co * 4 + a * 2 + b) * hw;
        for (std::size_t i = 0; i < h; ++i)
          for (std::size_t j = 0; j < wd; ++j) out[(co * oh + 2 * i + a) * ow + 2 * j + b] = zr[i * wd + j];
      }
  return Tensor<T>::make_result({cout, oh, ow}, std::move(out), {x, w}, [=](Node<T>& self) {
    std::vector<T> dz(k4 * hw);
    for (std::size_t co = 0; co < cout; ++co)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
          T* zr = dz.data() + (co * 4 + a * 2 + b) * hw;
          for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < wd; ++j) zr[i * wd + j] = self.grad[(co * oh + 2 * i + a) * ow + 2 * j + b];
        }
    if (wants(self, 0)) {
      kernels::gemm_acc(cin, hw, k4, data_of(self, 1).data(), dz.data(), grad_of(self, 0).data());
    }
    if (wants(self, 1)) {
      auto dzt = transposed(dz.data(), k4, hw);
      kernels::gemm_acc(cin, k4, hw, data_of(self, 0).data(), dzt.data(), grad_of(self, 1).data());
    }
  });
}

template <typename T>
Tensor<T> add_channel_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  require_rank(x, 3, "add_channel_bias");
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
  require(bias.numel() == c, "add_channel_bias: bias " + to_string(bias.shape()) + " for " + to_string(x.shape()));
  std::vector<T> out(x.data().begin(), x.data().end());
  for (std::size_t ch = 0; ch < c; ++ch) {
    const T b = bias.data()[ch];
    for (std::size_t i = 0; i < hw; ++i) out[ch * hw + i] += b;
  }
  return Tensor<T>::make_result(x.shape(), std::move(out), {x, bias}, [c, hw](Node<T>& self) {
    if (wants(self, 0)) {
      kernels::table<T>().accumulate(self.grad.size(), self.grad.data(), grad_of(self, 0).data());
    }
    if (wants(self, 1)) {
      auto& gb = grad_of(self, 1);
      for (std::size_t ch = 0; ch < c; ++ch) {
        T s(0);
        for (std::size_t i = 0; i < hw; ++i) s += self.grad[ch * hw + i];
        gb[ch] += s;
      }
    }
  });
}

template <typename T>
Tensor<T> channel_scale(const Tensor<T>& x, const Tensor<T>& gamma) {
  require_rank(x, 3, "channel_scale");
  const std::size_t c = x.dim(0), hw = x.dim(1) * x.dim(2);
  require(gamma.numel() == c, "channel_scale: gamma " + to_string(gamma.shape()) + " for " + to_string(x.shape()));
  std::vector<T> out(x.numel());
  const auto& k = kernels::table<T>();
  for (std::size_t ch = 0; ch < c; ++ch) k.scale(hw, gamma.data()[ch], x.data().data() + ch * hw, out.data() + ch * hw);
  return Tensor<T>::make_result(x.shape(), std::move(out), {x, gamma}, [c, hw](Node<T>& self) {
    const auto& k = kernels::table<T>();
    if (wants(self, 0)) {
      auto& gx = grad_of(self, 0);
      const auto& g = data_of(self, 1);
      for (std::size_t ch = 0; ch < c; ++ch) k.axpy(hw, g[ch], self.grad.data() + ch * hw, gx.data() + ch * hw);
    }
    if (wants(self, 1)) {
      auto& gg = grad_of(self, 1);
      const auto& xd = data_of(self, 0);
      for (std::size_t ch = 0; ch < c; ++ch) {
        T s(0);
        for (std::size_t i = 0; i < hw; ++i) s += self.grad[ch * hw + i] * xd[ch * hw + i];
        gg[ch] += s;
      }
    }
  });
}

template <typename T>
Tensor<T> instance_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  require_rank(x, 3, "instance_norm");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const auto ones = Tensor<T>::full({h * w}, T(1));
  const Tensor<T> zeros({h * w});
  auto normed = reshape(layer_norm(reshape(x, {c, h * w}), ones, zeros, eps), {c, h, w});
  return add_channel_bias(channel_scale(normed, gamma), beta);
}

template <typename T>
Tensor<T> conv1x1(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  require_rank(x, 3, "conv1x1");
  require_rank(w, 2, "conv1x1 weight");
  const std::size_t cin = x.dim(0), h = x.dim(1), wd = x.dim(2), hw = h * wd;
  require(w.dim(0) == cin, "conv1x1: weight " + to_string(w.shape()) + " for input " + to_string(x.shape()));
  const std::size_t cout = w.dim(1);
  auto flat = reshape(x, {cin, hw});
  auto y = matmul(transpose(w), flat);
  return add_channel_bias(reshape(y, {cout, h, wd}), b);
}

template <typename T>
Tensor<T> channel_layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  require_rank(x, 3, "channel_layer_norm");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  auto rows = transpose(reshape(x, {c, h * w}));
  auto normed = layer_norm(rows, gamma, beta, eps);
  return reshape(transpose(normed), {c, h, w});
}

template <typename T>
Tensor<T> upsample_nearest(const Tensor<T>& x, std::size_t factor, std::size_t out_h, std::size_t out_w) {
  require_rank(x, 3, "upsample_nearest");
  const std::size_t c = x.dim(0), h = x.dim(1), w = x.dim(2);
  require(factor >= 1 && out_h <= h * factor && out_w <= w * factor && out_h > 0 && out_w > 0,
          "upsample_nearest: cannot reach " + std::to_string(out_h) + "x" + std::to_string(out_w) + " from " +
              to_string(x.shape()) + " by factor " + std::to_string(factor));
  std::vector<T> out(c * out_h * out_w);
  const auto xd = x.data();
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < out_h; ++y)
      for (std::size_t xx = 0; xx < out_w; ++xx)
        out[(ch * out_h + y) * out_w + xx] = xd[(ch * h + y / factor) * w + xx / factor];
  return Tensor<T>::make_result({c, out_h, out_w}, std::move(out), {x}, [=](Node<T>& self) {
    auto& gx = grad_of(self, 0);
    for (std::size_t ch = 0; ch < c; ++ch)
      for (std::size_t y = 0; y < out_h; ++y)
        for (std::size_t xx = 0; xx < out_w; ++xx)
          gx[(ch * h + y / factor) * w + xx / factor] += self.grad[(ch * out_h + y) * out_w + xx];
  });
}

template <typename T>
Tensor<T> select_rows(const Tensor<T>& x, const std::vector<std::size_t>& index) {
  require_rank(x, 2, "select_rows");
  const std::size_t rows = x.dim(0), h = x.dim(1);
  require(!index.empty(), "select_rows: empty index");
  std::vector<T> out(index.size() * h);
  for (std::size_t i = 0; i < index.size(); ++i) {
    require(index[i] < rows, "select_rows: row " + std::to_string(index[i]) + " out of " + std::to_string(rows));
    std::copy_n(x.data().data() + index[i] * h, h, out.data() + i * h);
  }
  return Tensor<T>::make_result({index.size(), h}, std::move(out), {x}, [index, h](Node<T>& self) {
    auto& gx = grad_of(self, 0);
    const auto& k = kernels::table<T>();
    for (std::size_t i = 0; i < index.size(); ++i) k.accumulate(h, self.grad.data() + i * h, gx.data() + index[i] * h);
  });
}

template <typename T>
Tensor<T> concat_rows(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "concat_rows");
  require_rank(b, 2, "concat_rows");
  require(a.dim(1) == b.dim(1), "concat_rows: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  std::vector<T> out(a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const std::size_t na = a.numel();
  return Tensor<T>::make_result({a.dim(0) + b.dim(0), a.dim(1)}, std::move(out), {a, b}, [na](Node<T>& self) {
    const auto& k = kernels::table<T>();
    if (wants(self, 0)) k.accumulate(na, self.grad.data(), grad_of(self, 0).data());
    if (wants(self, 1)) k.accumulate(self.grad.size() - na, self.grad.data() + na, grad_of(self, 1).data());
  });
}

template <typename T>
Tensor<T> tokens_to_map(const Tensor<T>& tokens, std::size_t grid_h, std::size_t grid_w) {
  require_rank(tokens, 2, "tokens_to_map");
  require(tokens.dim(0) == grid_h * grid_w, "tokens_to_map: " + to_string(tokens.shape()) + " for grid " +
                                                std::to_string(grid_h) + "x" + std::to_string(grid_w));
  return reshape(transpose(tokens), {tokens.dim(1), grid_h, grid_w});
}

template <typename T>
Tensor<T> map_to_tokens(const Tensor<T>& map) {
  require_rank(map, 3, "map_to_tokens");
  return transpose(reshape(map, {map.dim(0), map.dim(1) * map.dim(2)}));
}

namespace {

// Source offset inside image[C,H,W] for patch element (row, col).
struct PatchLayout {
  std::size_t c, h, w, p, gw;
  std::size_t source(std::size_t row, std::size_t col) const {
    const std::size_t gy = row / gw, gx = row % gw;
    const std::size_t ch = col % c, pix = col / c;
    const std::size_t py = pix / p, px = pix % p;
    return (ch * h + gy * p + py) * w + gx * p + px;
  }
};

}  // namespace

template <typename T>
Tensor<T> patchify(const Tensor<T>& image, std::size_t patch) {
  require_rank(image, 3, "patchify");
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  require(patch > 0 && h % patch == 0 && w % patch == 0,
          "patchify: image " + to_string(image.shape()) + " not divisible by patch " + std::to_string(patch));
  const PatchLayout lay{c, h, w, patch, w / patch};
  const std::size_t rows = (h / patch) * (w / patch), cols = patch * patch * c;
  std::vector<T> out(rows * cols);
  const auto src = image.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t col = 0; col < cols; ++col) out[r * cols + col] = src[lay.source(r, col)];
  return Tensor<T>::make_result({rows, cols}, std::move(out), {image}, [lay, rows, cols](Node<T>& self) {
    auto& gi = grad_of(self, 0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t col = 0; col < cols; ++col) gi[lay.source(r, col)] += self.grad[r * cols + col];
  });
}

template <typename T>
Tensor<T> unpatchify(const Tensor<T>& patches, std::size_t channels, std::size_t height, std::size_t width,
                     std::size_t patch) {
  require_rank(patches, 2, "unpatchify");
  require(patch > 0 && height % patch == 0 && width % patch == 0, "unpatchify: size not divisible by patch");
  const PatchLayout lay{channels, height, width, patch, width / patch};
  const std::size_t rows = (height / patch) * (width / patch), cols = patch * patch * channels;
  require(patches.dim(0) == rows && patches.dim(1) == cols,
          "unpatchify: " + to_string(patches.shape()) + " does not tile " + std::to_string(channels) + "x" +
              std::to_string(height) + "x" + std::to_string(width));
  std::vector<T> out(channels * height * width);
  const auto src = patches.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t col = 0; col < cols; ++col) out[lay.source(r, col)] = src[r * cols + col];
  return Tensor<T>::make_result({channels, height, width}, std::move(out), {patches},
                                [lay, rows, cols](Node<T>& self) {
                                  auto& gp = grad_of(self, 0);
                                  for (std::size_t r = 0; r < rows; ++r)
                                    for (std::size_t col = 0; col < cols; ++col)
                                      gp[r * cols + col] += self.grad[lay.source(r, col)];
                                });
}

TokenGroups single_group(std::size_t tokens) {
  TokenGroups g(1);
  g[0].resize(tokens);
  for (std::size_t i = 0; i < tokens; ++i) g[0][i] = i;
  return g;
}

template <typename T>
Tensor<T> attention(const Tensor<T>& qkv, std::size_t heads, const TokenGroups& groups) {
  require_rank(qkv, 2, "attention");
  const std::size_t n_tok = qkv.dim(0), width = qkv.dim(1);
  require(width % 3 == 0, "attention: qkv width " + std::to_string(width) + " not divisible by 3");
  const std::size_t h = width / 3;
  require(heads > 0 && h % heads == 0,
          "attention: hidden " + std::to_string(h) + " not divisible by " + std::to_string(heads) + " heads");
  const std::size_t d = h / heads;
  {
    std::vector<char> covered(n_tok, 0);
    for (const auto& g : groups) {
      for (auto t : g) {
        if (t >= n_tok || covered[t]) throw ContractError("attention: token groups must partition the tokens");
        covered[t] = 1;
      }
    }
    if (std::find(covered.begin(), covered.end(), 0) != covered.end()) {
      throw ContractError("attention: token groups must partition the tokens");
    }
  }
  const T sc = T(1) / std::sqrt(static_cast<T>(d));
  const auto src = qkv.data();
  std::vector<T> out(n_tok * h, T(0));
  // Attention probabilities per (group, head), kept for backward.
  std::vector<std::vector<T>> probs;
  probs.reserve(groups.size() * heads);

  auto gather = [d, width](const std::vector<T>& data, const std::vector<std::size_t>& rows, std::size_t off) {
    std::vector<T> m(rows.size() * d);
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(data.data() + rows[i] * width + off, d, m.data() + i * d);
    return m;
  };
  const std::vector<T> src_vec(src.begin(), src.end());

  for (const auto& rows : groups) {
    const std::size_t n = rows.size();
    for (std::size_t hd = 0; hd < heads; ++hd) {
      auto q = gather(src_vec, rows, hd * d);
      auto k = gather(src_vec, rows, h + hd * d);
      auto v = gather(src_vec, rows, 2 * h + hd * d);
      auto kt = transposed(k.data(), n, d);
      std::vector<T> s(n * n, T(0));
      kernels::gemm_acc(n, n, d, q.data(), kt.data(), s.data());
      for (std::size_t i = 0; i < n; ++i) {
        T* sr = s.data() + i * n;
        T mx = -std::numeric_limits<T>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
          sr[j] *= sc;
          mx = std::max(mx, sr[j]);
        }
        T z(0);
        for (std::size_t j = 0; j < n; ++j) {
          sr[j] = std::exp(sr[j] - mx);
          z += sr[j];
        }
        for (std::size_t j = 0; j < n; ++j) sr[j] /= z;
      }
      std::vector<T> o(n * d, T(0));
      kernels::gemm_acc(n, d, n, s.data(), v.data(), o.data());
      for (std::size_t i = 0; i < n; ++i) std::copy_n(o.data() + i * d, d, out.data() + rows[i] * h + hd * d);
      probs.push_back(std::move(s));
    }
  }

  return Tensor<T>::make_result(
      {n_tok, h}, std::move(out), {qkv},
      [groups, heads, h, d, width, sc, probs = std::move(probs), gather](Node<T>& self) {
        const auto& data = data_of(self, 0);
        auto& gq = grad_of(self, 0);
        std::size_t slot = 0;
        for (const auto& rows : groups) {
          const std::size_t n = rows.size();
          for (std::size_t hd = 0; hd < heads; ++hd, ++slot) {
            const auto& p = probs[slot];
            auto q = gather(data, rows, hd * d);
            auto k = gather(data, rows, h + hd * d);
            auto v = gather(data, rows, 2 * h + hd * d);
            std::vector<T> dout(n * d);
            for (std::size_t i = 0; i < n; ++i) std::copy_n(self.grad.data() + rows[i] * h + hd * d, d, dout.data() + i * d);

            std::vector<T> dv(n * d, T(0));
            auto pt = transposed(p.data(), n, n);
            kernels::gemm_acc(n, d, n, pt.data(), dout.data(), dv.data());

            std::vector<T> dp(n * n, T(0));
            auto vt = transposed(v.data(), n, d);
            kernels::gemm_acc(n, n, d, dout.data(), vt.data(), dp.data());

            std::vector<T> ds(n * n);
            for (std::size_t i = 0; i < n; ++i) {
              T dot(0);
              for (std::size_t j = 0; j < n; ++j) dot += dp[i * n + j] * p[i * n + j];
              for (std::size_t j = 0; j < n; ++j) ds[i * n + j] = p[i * n + j] * (dp[i * n + j] - dot) * sc;
            }
            std::vector<T> dq(n * d, T(0));
            kernels::gemm_acc(n, d, n, ds.data(), k.data(), dq.data());
            std::vector<T> dk(n * d, T(0));
            auto dst = transposed(ds.data(), n, n);
            kernels::gemm_acc(n, d, n, dst.data(), q.data(), dk.data());

            for (std::size_t i = 0; i < n; ++i) {
              T* row = gq.data() + rows[i] * width;
              for (std::size_t j = 0; j < d; ++j) {
                row[hd * d + j] += dq[i * d + j];
                row[h + hd * d + j] += dk[i * d + j];
                row[2 * h + hd * d + j] += dv[i * d + j];
              }
            }
          }
        }
      });
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<int>& labels, int ignore) {
  require_rank(logits, 2, "cross_entropy");
  const std::size_t k = logits.dim(0), p = logits.dim(1);
  require(labels.size() == p, "cross_entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(p) +
                                  " pixels");
  const auto ld = logits.data();
  std::vector<T> prob(k * p);
  T total(0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < p; ++i) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, ld[c * p + i]);
    T z(0);
    for (std::size_t c = 0; c < k; ++c) {
      prob[c * p + i] = std::exp(ld[c * p + i] - mx);
      z += prob[c * p + i];
    }
    for (std::size_t c = 0; c < k; ++c) prob[c * p + i] /= z;
    if (labels[i] == ignore) continue;
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw ContractError("cross_entropy: label " + std::to_string(labels[i]) + " outside [0," + std::to_string(k) + ")");
    }
    total += -(ld[static_cast<std::size_t>(labels[i]) * p + i] - mx - std::log(z));
    ++count;
  }
  const T loss = count ? total / static_cast<T>(count) : T(0);
  return Tensor<T>::make_result({1}, {loss}, {logits},
                                [k, p, count, labels, ignore, prob = std::move(prob)](Node<T>& self) {
                                  if (count == 0) return;
                                  auto& gl = grad_of(self, 0);
                                  const T g = self.grad[0] / static_cast<T>(count);
                                  for (std::size_t i = 0; i < p; ++i) {
                                    if (labels[i] == ignore) continue;
                                    for (std::size_t c = 0; c < k; ++c) {
                                      const T onehot = static_cast<int>(c) == labels[i] ? T(1) : T(0);
                                      gl[c * p + i] += g * (prob[c * p + i] - onehot);
                                    }
                                  }
                                });
}

#define SVLB_INSTANTIATE_OPS(T)                                                                         \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                        \
  template Tensor<T> transpose(const Tensor<T>&);                                                       \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                                 \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                           \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                           \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                           \
  template Tensor<T> scale(const Tensor<T>&, T);                                                        \
  template Tensor<T> add_row_bias(const Tensor<T>&, const Tensor<T>&);                                  \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> sum(const Tensor<T>&);                                                             \
  template Tensor<T> mean(const Tensor<T>&);                                                            \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);               \
  template Tensor<T> gelu(const Tensor<T>&);                                                            \
  template Tensor<T> softmax(const Tensor<T>&);                                                         \
  template Tensor<T> max_pool2d(const Tensor<T>&);                                                      \
  template Tensor<T> avg_pool2d(const Tensor<T>&);                                                      \
  template Tensor<T> conv_transpose2x2(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> add_channel_bias(const Tensor<T>&, const Tensor<T>&);                              \
  template Tensor<T> conv1x1(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> channel_layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);       \
  template Tensor<T> channel_scale(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> instance_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);            \
  template Tensor<T> upsample_nearest(const Tensor<T>&, std::size_t, std::size_t, std::size_t);         \
  template Tensor<T> select_rows(const Tensor<T>&, const std::vector<std::size_t>&);                    \
  template Tensor<T> concat_rows(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> tokens_to_map(const Tensor<T>&, std::size_t, std::size_t);                         \
  template Tensor<T> map_to_tokens(const Tensor<T>&);                                                   \
  template Tensor<T> patchify(const Tensor<T>&, std::size_t);                                           \
  template Tensor<T> unpatchify(const Tensor<T>&, std::size_t, std::size_t, std::size_t, std::size_t); \
  template Tensor<T> attention(const Tensor<T>&, std::size_t, const TokenGroups&);                      \
  template Tensor<T> cross_entropy(const Tensor<T>&, const std::vector<int>&, int);

SVLB_INSTANTIATE_OPS(float)
SVLB_INSTANTIATE_OPS(double)

}  // namespace svlb::ops
