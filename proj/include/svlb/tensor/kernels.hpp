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
#include <string_view>

// Inner loops of the tensor engine. Every kernel has a scalar reference and
// an AVX2 variant; the active table is chosen once at startup from CPUID
// (override with SVLB_ISA=scalar|avx2). All variants perform the same
// per-element operations in the same order without fused multiply-add, so
// results are bit-identical whichever table runs.

namespace svlb::kernels {

enum class Isa { kScalar, kAvx2 };

template <typename T>
struct Table {
  // y[i] += a * x[i]
  void (*axpy)(std::size_t n, T a, const T* x, T* y);
  // out[i] = a[i] + b[i]
  void (*add)(std::size_t n, const T* a, const T* b, T* out);
  // out[i] = a[i] * b[i]
  void (*mul)(std::size_t n, const T* a, const T* b, T* out);
  // out[i] = a * x[i]
  void (*scale)(std::size_t n, T a, const T* x, T* out);
  // y[i] += x[i]
  void (*accumulate)(std::size_t n, const T* x, T* y);
};

bool supported(Isa isa) noexcept;
Isa active() noexcept;
// Switches the process-wide table. Throws ContractError if unsupported.
void set_active(Isa isa);
std::string_view name(Isa isa) noexcept;

template <typename T>
const Table<T>& table(Isa isa);

template <typename T>
inline const Table<T>& table() {
  return table<T>(active());
}

// Reference implementations, exposed for equivalence tests.
namespace scalar {
template <typename T>
const Table<T>& get();
}
namespace avx2 {
// Only callable when supported(Isa::kAvx2).
template <typename T>
const Table<T>& get();
}

// C[m,n] += A[m,k] * B[k,n], all row-major and dense. Built on axpy so that
// every output element accumulates over k in ascending order.
template <typename T>
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

}  // namespace svlb::kernels
