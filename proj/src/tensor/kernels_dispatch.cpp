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

#include <atomic>
#include <cstdlib>
#include <string>

#include "svlb/error.hpp"
#include "svlb/tensor/kernels.hpp"

namespace svlb::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  if (const char* env = std::getenv("SVLB_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::kScalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::kAvx2;
  }
  return cpu_has_avx2() ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return cpu_has_avx2();
  }
  return false;
}

Isa active() noexcept { return current().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
  if (!supported(isa)) throw ContractError("kernel ISA not supported on this CPU: " + std::string(name(isa)));
  current().store(isa, std::memory_order_relaxed);
}

std::string_view name(Isa isa) noexcept {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

template <typename T>
const Table<T>& table(Isa isa) {
  if (isa == Isa::kAvx2 && cpu_has_avx2()) return avx2::get<T>();
  return scalar::get<T>();
}

template <typename T>
void gemm_acc(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  const auto axpy = table<T>().axpy;
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) axpy(n, arow[p], b + p * n, crow);
  }
}

template const Table<float>& table<float>(Isa);
template const Table<double>& table<double>(Isa);
template void gemm_acc<float>(std::size_t, std::size_t, std::size_t, const float*, const float*, float*);
template void gemm_acc<double>(std::size_t, std::size_t, std::size_t, const double*, const double*, double*);

}  // namespace svlb::kernels
