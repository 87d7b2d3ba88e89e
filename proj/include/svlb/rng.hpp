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
#include <string_view>
#include <vector>

namespace svlb {

// Counter-based generator. Output i of a stream with key k is
//
//   mix(k + (i + 1) * 0x9E3779B97F4A7C15)
//
// where mix is the SplitMix64 finalizer (shift/xor-multiply with constants
// 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). Because every draw is a pure
// function of (key, counter) the sequence is identical on every platform, and
// child streams obtained by split() never overlap their parent's draws.
//
// Child keys: split(label) = mix(key ^ fnv1a64(label)),
//             split(index) = mix(key ^ mix(index + 0xD1B54A32D192ED03)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : key_(seed) {}

  std::uint64_t seed() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; one value per call (the pair's second
  // half is discarded so that draws stay a function of the counter only).
  double normal();

  // Uniformly random permutation of [0, n) by Fisher-Yates.
  std::vector<std::size_t> permutation(std::size_t n);

  Rng split(std::string_view label) const;
  Rng split(std::uint64_t index) const;

  static std::uint64_t mix(std::uint64_t z) noexcept;
  static std::uint64_t fnv1a(std::string_view s) noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace svlb
