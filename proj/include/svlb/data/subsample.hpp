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
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "svlb/data/synth.hpp"

namespace svlb::data {

// Sorted indices of the first round(ratio * n) entries of one seeded
// permutation of [0, n), so smaller ratios give subsets of larger ones.
// Throws ContractError unless 0 < ratio <= 1 and the subset is non-empty.
std::vector<std::size_t> subsample_indices(std::size_t n, double ratio, const Rng& rng);

struct DistributionReport {
  std::map<int, std::uint64_t> counts;
  std::uint64_t total = 0;
};

// Object instances per class over the selected scenes.
DistributionReport instance_distribution(const std::vector<SceneSample>& scenes,
                                         const std::vector<std::size_t>& indices);
// Mask pixels per label over the selected scenes.
DistributionReport pixel_distribution(const std::vector<SceneSample>& scenes, const std::vector<std::size_t>& indices);

// "class_id,count" rows then "total,<n>".
std::string distribution_csv(const DistributionReport& report);

}  // namespace svlb::data
