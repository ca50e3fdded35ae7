// Copyright 2026 The ROLAH Authors.
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
//
// The adversary population and worst-k selection. Selection uses the total
// order (value, index): ascending estimated return, ties broken by the
// smaller index, so exactly k adversaries are always picked even under
// exact ties. With distinct values this coincides with picking the set of
// adversaries whose "at most k are as bad as me" count is at most k.

#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "rolah/errors.hpp"
#include "rolah/policy.hpp"
#include "rolah/rollout.hpp"

namespace rolah {

struct WorstKSet {
  std::vector<int> indices;  // ascending by (value, index)
  int cardinality = 0;
};

namespace internal {

inline void check_k(std::size_t m, int k) {
  if (m < 1) throw ValidationError("estimates must be nonempty");
  if (k < 1 || k > static_cast<int>(m))
    throw ValidationError("k must lie in [1, m]: k=" + std::to_string(k) +
                          ", m=" + std::to_string(m));
}

inline bool worse(std::span<const double> est, int a, int b) {
  return est[a] < est[b] || (est[a] == est[b] && a < b);
}

}  // namespace internal

// Implements the index-set construction directly: adversary i is selected
// iff at most k herd members are at-least-as-bad under the total order.
inline WorstKSet worst_k_indices(std::span<const double> estimates, int k) {
  internal::check_k(estimates.size(), k);
  const int m = static_cast<int>(estimates.size());
  WorstKSet out;
  for (int i = 0; i < m; ++i) {
    int at_least_as_bad = 0;
    for (int j = 0; j < m; ++j)
      if (j == i || internal::worse(estimates, j, i)) ++at_least_as_bad;
    if (at_least_as_bad <= k) out.indices.push_back(i);
  }
  std::sort(out.indices.begin(), out.indices.end(),
            [&](int a, int b) { return internal::worse(estimates, a, b); });
  out.cardinality = static_cast<int>(out.indices.size());
  return out;
}

// Mean estimated return over the worst k. k=1 recovers the min, k=m the
// plain average over the whole herd.
inline double worst_k_objective(std::span<const double> estimates, int k) {
  const WorstKSet set = worst_k_indices(estimates, k);
  double total = 0.0;
  for (int i : set.indices) total += estimates[i];
  return total / static_cast<double>(set.cardinality);
}

struct HerdState {
  std::vector<PolicyParams> adversaries;
  int m = 0;
  int k = 0;
  std::vector<ReturnEstimate> last_estimates;  // empty before first eval
};

inline HerdState init_herd(int m, int k, const MlpShapes& adversary_shapes,
                           std::uint64_t seed) {
  if (m < 1 || k < 1 || k > m)
    throw ValidationError("herd needs m >= k >= 1: m=" + std::to_string(m) +
                          ", k=" + std::to_string(k));
  validate(adversary_shapes);
  HerdState herd;
  herd.m = m;
  herd.k = k;
  herd.adversaries.reserve(m);
  for (int i = 0; i < m; ++i)
    herd.adversaries.push_back(
        init_policy(adversary_shapes, split_seed(seed, i)));
  return herd;
}

}  // namespace rolah
