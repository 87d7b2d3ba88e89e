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

#include <cstring>
#include <vector>

#include "svlb/rng.hpp"
#include "svlb/tensor/kernels.hpp"
#include "svlb/tensor/ops.hpp"

namespace svlb::kernels {
namespace {

template <typename T>
std::vector<T> random_vec(std::size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.normal());
  return v;
}

template <typename T>
bool bit_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

template <typename T>
class KernelEquivalence : public ::testing::Test {};

using Precisions = ::testing::Types<float, double>;
TYPED_TEST_SUITE(KernelEquivalence, Precisions);

TYPED_TEST(KernelEquivalence, Avx2MatchesScalarBitForBit) {
  using T = TypeParam;
  if (!supported(Isa::kAvx2)) GTEST_SKIP() << "AVX2 not available";
  const auto& ref = scalar::get<T>();
  const auto& simd = avx2::get<T>();
  Rng rng(123);
  // Lengths straddle every unroll boundary of the vector paths.
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 1001u}) {
    auto x = random_vec<T>(n, rng);
    auto y = random_vec<T>(n, rng);
    const T a = static_cast<T>(rng.normal());

    auto y_ref = y, y_simd = y;
    ref.axpy(n, a, x.data(), y_ref.data());
    simd.axpy(n, a, x.data(), y_simd.data());
    EXPECT_TRUE(bit_equal(y_ref, y_simd)) << "axpy n=" << n;

    std::vector<T> o_ref(n), o_simd(n);
    ref.add(n, x.data(), y.data(), o_ref.data());
    simd.add(n, x.data(), y.data(), o_simd.data());
    EXPECT_TRUE(bit_equal(o_ref, o_simd)) << "add n=" << n;

    ref.mul(n, x.data(), y.data(), o_ref.data());
    simd.mul(n, x.data(), y.data(), o_simd.data());
    EXPECT_TRUE(bit_equal(o_ref, o_simd)) << "mul n=" << n;

    ref.scale(n, a, x.data(), o_ref.data());
    simd.scale(n, a, x.data(), o_simd.data());
    EXPECT_TRUE(bit_equal(o_ref, o_simd)) << "scale n=" << n;

    y_ref = y;
    y_simd = y;
    ref.accumulate(n, x.data(), y_ref.data());
    simd.accumulate(n, x.data(), y_simd.data());
    EXPECT_TRUE(bit_equal(y_ref, y_simd)) << "accumulate n=" << n;
  }
}

TYPED_TEST(KernelEquivalence, GemmIndependentOfActiveIsa) {
  using T = TypeParam;
  if (!supported(Isa::kAvx2)) GTEST_SKIP() << "AVX2 not available";
  Rng rng(7);
  const std::size_t m = 13, n = 37, k = 19;
  auto a = random_vec<T>(m * k, rng);
  auto b = random_vec<T>(k * n, rng);
  const Isa saved = active();
  std::vector<T> c_scalar(m * n, T(0)), c_simd(m * n, T(0));
  set_active(Isa::kScalar);
  gemm_acc(m, n, k, a.data(), b.data(), c_scalar.data());
  set_active(Isa::kAvx2);
  gemm_acc(m, n, k, a.data(), b.data(), c_simd.data());
  set_active(saved);
  EXPECT_TRUE(bit_equal(c_scalar, c_simd));

  // Naive triple loop in the same accumulation order.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      T s(0);
      for (std::size_t p = 0; p < k; ++p) s = s + a[i * k + p] * b[p * n + j];
      EXPECT_EQ(s, c_scalar[i * n + j]);
    }
}

TEST(KernelDispatch, ForwardAndBackwardIdenticalAcrossIsas) {
  if (!supported(Isa::kAvx2)) GTEST_SKIP() << "AVX2 not available";
  auto run = [] {
    Rng rng(3);
    auto x = TensorF::randn({9, 24}, rng, 1.0f, true);
    auto w = TensorF::randn({24, 72}, rng, 0.2f, true);
    auto qkv = ops::matmul(x, w);
    auto y = ops::gelu(ops::attention(qkv, 3, ops::TokenGroups{{0, 1, 2, 3}, {4, 5, 6, 7, 8}}));
    ops::sum(ops::mul(y, y)).backward();
    std::vector<float> out(y.data().begin(), y.data().end());
    out.insert(out.end(), w.grad().begin(), w.grad().end());
    return out;
  };
  const Isa saved = active();
  set_active(Isa::kScalar);
  auto a = run();
  set_active(Isa::kAvx2);
  auto b = run();
  set_active(saved);
  EXPECT_TRUE(bit_equal(a, b));
}

}  // namespace
}  // namespace svlb::kernels
