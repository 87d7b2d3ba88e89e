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

// Compiled with -mavx2. Nothing in this file may run before the dispatcher
// has confirmed AVX2 support.

#include <immintrin.h>

#include "svlb/tensor/kernels.hpp"

namespace svlb::kernels::avx2 {

namespace {

template <typename T>
struct Vec;

template <>
struct Vec<float> {
  using type = __m256;
  static constexpr std::size_t kLanes = 8;
  static type load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, type v) { _mm256_storeu_ps(p, v); }
  static type set1(float a) { return _mm256_set1_ps(a); }
  static type add(type a, type b) { return _mm256_add_ps(a, b); }
  static type mul(type a, type b) { return _mm256_mul_ps(a, b); }
};

template <>
struct Vec<double> {
  using type = __m256d;
  static constexpr std::size_t kLanes = 4;
  static type load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, type v) { _mm256_storeu_pd(p, v); }
  static type set1(double a) { return _mm256_set1_pd(a); }
  static type add(type a, type b) { return _mm256_add_pd(a, b); }
  static type mul(type a, type b) { return _mm256_mul_pd(a, b); }
};

template <typename T>
void axpy(std::size_t n, T a, const T* x, T* y) {
  using V = Vec<T>;
  const auto va = V::set1(a);
  std::size_t i = 0;
  for (; i + 2 * V::kLanes <= n; i += 2 * V::kLanes) {
    auto y0 = V::add(V::load(y + i), V::mul(va, V::load(x + i)));
    auto y1 = V::add(V::load(y + i + V::kLanes), V::mul(va, V::load(x + i + V::kLanes)));
    V::store(y + i, y0);
    V::store(y + i + V::kLanes, y1);
  }
  for (; i + V::kLanes <= n; i += V::kLanes) {
    V::store(y + i, V::add(V::load(y + i), V::mul(va, V::load(x + i))));
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

template <typename T>
void add(std::size_t n, const T* a, const T* b, T* out) {
  using V = Vec<T>;
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes) V::store(out + i, V::add(V::load(a + i), V::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

template <typename T>
void mul(std::size_t n, const T* a, const T* b, T* out) {
  using V = Vec<T>;
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes) V::store(out + i, V::mul(V::load(a + i), V::load(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

template <typename T>
void scale(std::size_t n, T a, const T* x, T* out) {
  using V = Vec<T>;
  const auto va = V::set1(a);
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes) V::store(out + i, V::mul(va, V::load(x + i)));
  for (; i < n; ++i) out[i] = a * x[i];
}

template <typename T>
void accumulate(std::size_t n, const T* x, T* y) {
  using V = Vec<T>;
  std::size_t i = 0;
  for (; i + V::kLanes <= n; i += V::kLanes) V::store(y + i, V::add(V::load(y + i), V::load(x + i)));
  for (; i < n; ++i) y[i] = y[i] + x[i];
}

}  // namespace

template <typename T>
const Table<T>& get() {
  static const Table<T> t{&axpy<T>, &add<T>, &mul<T>, &scale<T>, &accumulate<T>};
  return t;
}

template const Table<float>& get<float>();
template const Table<double>& get<double>();

}  // namespace svlb::kernels::avx2
