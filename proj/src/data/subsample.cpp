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

#include "svlb/data/subsample.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svlb/error.hpp"

namespace svlb::data {

std::vector<std::size_t> subsample_indices(std::size_t n, double ratio, const Rng& rng) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ContractError("subsample: ratio must be in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (keep == 0) {
    throw ContractError("subsample: ratio " + std::to_string(ratio) + " of " + std::to_string(n) +
                        " images selects nothing");
  }
  Rng local = rng;
  auto perm = local.permutation(n);
  perm.resize(keep);
  std::sort(perm.begin(), perm.end());
  return perm;
}

DistributionReport instance_distribution(const std::vector<SceneSample>& scenes,
                                         const std::vector<std::size_t>& indices) {
  DistributionReport r;
  for (auto i : indices) {
    for (const auto& b : scenes.at(i).boxes) {
      ++r.counts[b.class_id];
      ++r.total;
    }
  }
  return r;
}

DistributionReport pixel_distribution(const std::vector<SceneSample>& scenes, const std::vector<std::size_t>& indices) {
  DistributionReport r;
  for (auto i : indices) {
    const auto& m = scenes.at(i).mask;
    for (auto l : m.labels) {
      if (m.ignored(l)) continue;
      ++r.counts[l];
      ++r.total;
    }
  }
  return r;
}

std::string distribution_csv(const DistributionReport& report) {
  std::ostringstream os;
  os << "class_id,count\n";
  for (const auto& [c, n] : report.counts) os << c << ',' << n << '\n';
  os << "total," << report.total << '\n';
  return os.str();
}

}  // namespace svlb::data
