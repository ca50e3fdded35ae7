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

#include "rolah/herd.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"

namespace rolah {
namespace {

// The reference implementation selection is checked against: stable sort of
// (value, index) pairs, take the first k positions.
std::vector<int> sort_oracle(const std::vector<double>& est, int k) {
  std::vector<int> order(est.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return est[a] < est[b] || (est[a] == est[b] && a < b);
  });
  order.resize(k);
  return order;
}

std::vector<double> random_estimates(Rng& rng, int m, bool force_ties) {
  std::vector<double> est(m);
  for (auto& e : est) e = rng.uniform(-5.0, 5.0);
  if (force_ties && m >= 2) {
    // Copy a few values around so exact duplicates exist.
    for (int c = 0; c < std::max(1, m / 3); ++c) {
      const int from = static_cast<int>(rng.next_u64() % m);
      const int to = static_cast<int>(rng.next_u64() % m);
      est[to] = est[from];
    }
  }
  return est;
}

TEST(WorstK, DocumentedExamples) {
  const std::vector<double> est = {0.2, 0.5, 0.1, 0.9};
  const WorstKSet two = worst_k_indices(est, 2);
  EXPECT_EQ(two.indices, (std::vector<int>{2, 0}));
  EXPECT_EQ(two.cardinality, 2);

  const WorstKSet all = worst_k_indices(est, 4);
  EXPECT_EQ(all.cardinality, 4);
  std::vector<int> sorted = all.indices;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2, 3}));

  // Tie on the minimum value: the smaller index wins.
  const WorstKSet tie = worst_k_indices(std::vector<double>{0.3, 0.3, 0.7}, 1);
  EXPECT_EQ(tie.indices, (std::vector<int>{0}));
}

TEST(WorstK, MatchesSortOracleWithAndWithoutTies) {
  Rng rng(1234);
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_u64() % 20);
    const int k = 1 + static_cast<int>(rng.next_u64() % m);
    const auto est = random_estimates(rng, m, trial % 2 == 1);
    const WorstKSet got = worst_k_indices(est, k);
    EXPECT_EQ(got.indices, sort_oracle(est, k))
        << "trial " << trial << " m=" << m << " k=" << k;
    EXPECT_EQ(got.cardinality, k);
  }
}

TEST(WorstK, PermutationEquivariantOnDistinctValues) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng.next_u64() % 10);
    std::vector<double> est(m);
    for (int i = 0; i < m; ++i) est[i] = i * 0.37 + rng.uniform(0.0, 0.1);
    const int k = 1 + static_cast<int>(rng.next_u64() % m);

    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = m - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
    std::vector<double> permuted(m);
    for (int i = 0; i < m; ++i) permuted[perm[i]] = est[i];

    const auto base = worst_k_indices(est, k).indices;
    const auto moved = worst_k_indices(permuted, k).indices;
    ASSERT_EQ(base.size(), moved.size());
    for (std::size_t j = 0; j < base.size(); ++j)
      EXPECT_EQ(moved[j], perm[base[j]]);
  }
}

TEST(WorstKObjective, DegenerateIdentitiesAndMonotonicity) {
  Rng rng(555);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + static_cast<int>(rng.next_u64() % 12);
    const auto est = random_estimates(rng, m, trial % 3 == 0);
    const double lo = *std::min_element(est.begin(), est.end());
    const double mean =
        std::accumulate(est.begin(), est.end(), 0.0) / static_cast<double>(m);
    EXPECT_NEAR(worst_k_objective(est, 1), lo, 1e-12);
    EXPECT_NEAR(worst_k_objective(est, m), mean, 1e-12);
    for (int k = 1; k < m; ++k)
      EXPECT_LE(worst_k_objective(est, k), worst_k_objective(est, k + 1) + 1e-12);
  }
}

TEST(WorstKObjective, MeanOfSelected) {
  const std::vector<double> est = {0.2, 0.5, 0.1, 0.9};
  EXPECT_NEAR(worst_k_objective(est, 2), 0.15, 1e-12);
}

TEST(WorstK, RangeErrors) {
  const std::vector<double> est = {1.0, 2.0};
  EXPECT_THROW(worst_k_indices(est, 0), ValidationError);
  EXPECT_THROW(worst_k_indices(est, 3), ValidationError);
  EXPECT_THROW(worst_k_indices(std::vector<double>{}, 1), ValidationError);
  try {
    worst_k_indices(est, 5);
  } catch (const ValidationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("k="), std::string::npos);
    EXPECT_NE(what.find("m="), std::string::npos);
  }
}

TEST(InitHerd, PopulationShapeAndDeterminism) {
  const MlpShapes shapes{{2, 8, 1}};
  const HerdState herd = init_herd(10, 3, shapes, 42);
  EXPECT_EQ(herd.m, 10);
  EXPECT_EQ(herd.k, 3);
  ASSERT_EQ(herd.adversaries.size(), 10u);
  EXPECT_TRUE(herd.last_estimates.empty());
  for (int i = 1; i < 10; ++i)
    EXPECT_NE(herd.adversaries[i].theta, herd.adversaries[0].theta);

  const HerdState again = init_herd(10, 3, shapes, 42);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(herd.adversaries[i].theta, again.adversaries[i].theta);

  const HerdState single = init_herd(1, 1, shapes, 7);
  EXPECT_EQ(single.m, 1);

  EXPECT_THROW(init_herd(2, 3, shapes, 1), ValidationError);
  EXPECT_THROW(init_herd(0, 0, shapes, 1), ValidationError);
}

}  // namespace
}  // namespace rolah
