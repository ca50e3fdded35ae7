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

#include "rolah/theory.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "rolah/parallel.hpp"

namespace rolah {
namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// -(theta - phi)^2 on theta in [-2.5, 2.5], phi in [-1, 1]: the sup over
// theta of |R(.,phi) - R(.,phi')| is attained at an endpoint, giving the
// closed form |phi - phi'| * (5 + |phi + phi'|).
double quadratic_distance(double phi_a, double phi_b) {
  return std::abs(phi_a - phi_b) * (5.0 + std::abs(phi_a + phi_b));
}

TEST(SyntheticClass, QuadraticMatchesClosedFormDistance) {
  const SyntheticClass c = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 1);
  ASSERT_EQ(c.n_phi(), 201);
  ASSERT_EQ(c.n_theta(), 101);
  EXPECT_DOUBLE_EQ(c.phi_points.front()[0], -1.0);
  EXPECT_DOUBLE_EQ(c.phi_points.back()[0], 1.0);
  EXPECT_DOUBLE_EQ(c.theta_points.front(), -2.5);
  EXPECT_DOUBLE_EQ(c.theta_points.back(), 2.5);
  for (int i = 0; i < c.n_phi(); i += 7)
    for (int j = 0; j < c.n_phi(); ++j)
      EXPECT_NEAR(c.dist[i][j],
                  quadratic_distance(c.phi_points[i][0], c.phi_points[j][0]),
                  1e-12);
  EXPECT_DOUBLE_EQ(c.r_max, 10.0);
  // Derivative bound: 2 * max|theta - phi| = 7.
  for (int i = 0; i < c.n_phi(); i += 5)
    for (int j = i + 1; j < c.n_phi(); ++j)
      EXPECT_LE(c.dist[i][j],
                7.0 * std::abs(c.phi_points[i][0] - c.phi_points[j][0]) + 1e-9);
}

TEST(SyntheticClass, BumpsRespectLipschitzBoundAndSeed) {
  const SyntheticClass c = build_synthetic_class("lipschitz-bumps", 80, 30, 3.0, 5);
  for (int i = 0; i < c.n_phi(); ++i)
    for (int j = i + 1; j < c.n_phi(); ++j)
      EXPECT_LE(c.dist[i][j],
                3.0 * euclid(c.phi_points[i], c.phi_points[j]) + 1e-9);
  const SyntheticClass same = build_synthetic_class("lipschitz-bumps", 80, 30, 3.0, 5);
  EXPECT_EQ(c.R, same.R);
  EXPECT_EQ(c.phi_points, same.phi_points);
  const SyntheticClass other = build_synthetic_class("lipschitz-bumps", 80, 30, 3.0, 6);
  EXPECT_NE(c.R, other.R);
}

TEST(SyntheticClass, ZeroLipschitzMeansConstantFamily) {
  const SyntheticClass c = build_synthetic_class("lipschitz-bumps", 30, 10, 0.0, 2);
  EXPECT_EQ(c.r_max, 0.0);
  for (const auto& row : c.R)
    for (double v : row) EXPECT_EQ(v, row[0]);
}

TEST(SyntheticClass, MetricIsAPseudometric) {
  const SyntheticClass c = build_synthetic_class("lipschitz-bumps", 40, 20, 2.0, 9);
  for (int i = 0; i < c.n_phi(); ++i) {
    EXPECT_EQ(c.dist[i][i], 0.0);
    for (int j = 0; j < c.n_phi(); ++j) {
      EXPECT_EQ(c.dist[i][j], c.dist[j][i]);
      for (int l = 0; l < c.n_phi(); l += 3)
        EXPECT_LE(c.dist[i][j], c.dist[i][l] + c.dist[l][j] + 1e-12);
    }
  }
}

TEST(SyntheticClass, BuilderValidatesInputs) {
  EXPECT_THROW(build_synthetic_class("mystery", 10, 10, 1.0, 0), ConfigError);
  try {
    build_synthetic_class("mystery", 10, 10, 1.0, 0);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("lipschitz-bumps"), std::string::npos);
    EXPECT_NE(msg.find("quadratic-bowls"), std::string::npos);
  }
  EXPECT_THROW(build_synthetic_class("quadratic-bowls", 0, 10, 7.0, 0), ValidationError);
  EXPECT_THROW(build_synthetic_class("quadratic-bowls", 10001, 10, 7.0, 0), ValidationError);
  EXPECT_THROW(build_synthetic_class("quadratic-bowls", 10, 0, 7.0, 0), ValidationError);
  EXPECT_THROW(build_synthetic_class("quadratic-bowls", 10, 1001, 7.0, 0), ValidationError);
  EXPECT_THROW(build_synthetic_class("quadratic-bowls", 10, 10, -1.0, 0), ValidationError);
  // A Lipschitz promise the table cannot keep is rejected.
  EXPECT_THROW(build_synthetic_class("quadratic-bowls", 201, 101, 1.0, 0), ValidationError);
}

TEST(Packing, QuadraticEpsilonThreeAgainstIndependentGreedy) {
  const SyntheticClass c = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 1);
  const PackingResult p = greedy_maximal_packing(c, 3.0);
  EXPECT_TRUE(p.is_packing);
  EXPECT_TRUE(p.is_cover);
  EXPECT_TRUE(p.is_maximal);
  // ceil(r_max / eps) = ceil(10/3) = 4 on the 1-D path that realizes the radius.
  EXPECT_GE(static_cast<int>(p.selected.size()), 4);
  EXPECT_EQ(p.selected.size(), 4u);

  // Independent greedy pass using the closed-form distance, not the table.
  std::vector<int> oracle;
  for (int i = 0; i < c.n_phi(); ++i) {
    bool far = true;
    for (int s : oracle)
      if (quadratic_distance(c.phi_points[i][0], c.phi_points[s][0]) <= 3.0) {
        far = false;
        break;
      }
    if (far) oracle.push_back(i);
  }
  EXPECT_EQ(p.selected, oracle);

  for (int t = 0; t < c.n_theta(); ++t) {
    const double gap = inner_min_gap(c, p.selected, t);
    EXPECT_GE(gap, 0.0);
    EXPECT_LE(gap, 3.0);
  }
}

TEST(Packing, FlagsMatchQuantifierOraclesOnRandomClasses) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticClass c =
        build_synthetic_class("lipschitz-bumps", 60, 25, 2.5, 100 + seed);
    ASSERT_GT(c.r_max, 0.0);
    for (double scale : {0.05, 0.1, 0.3}) {
      const double eps = scale * c.r_max;
      const PackingResult p = greedy_maximal_packing(c, eps);

      bool packing = true;
      for (std::size_t a = 0; a < p.selected.size(); ++a)
        for (std::size_t b = 0; b < p.selected.size(); ++b)
          if (a != b && c.dist[p.selected[a]][p.selected[b]] <= eps)
            packing = false;
      bool cover = true;
      for (int i = 0; i < c.n_phi(); ++i) {
        double nearest = c.r_max + 1.0;
        for (int s : p.selected) nearest = std::min(nearest, c.dist[i][s]);
        if (nearest > eps) cover = false;
      }
      EXPECT_EQ(p.is_packing, packing);
      EXPECT_EQ(p.is_cover, cover);
      EXPECT_TRUE(p.is_packing);
      EXPECT_TRUE(p.is_cover);
      EXPECT_TRUE(p.is_maximal);
      for (int t = 0; t < c.n_theta(); ++t) EXPECT_LE(inner_min_gap(c, p.selected, t), eps);
    }
  }
}

TEST(Packing, WideEpsilonSelectsSinglePointAndErrors) {
  const SyntheticClass c = build_synthetic_class("lipschitz-bumps", 50, 20, 2.0, 3);
  const PackingResult p = greedy_maximal_packing(c, c.r_max * 1.01);
  EXPECT_EQ(p.selected, std::vector<int>{0});
  EXPECT_TRUE(p.is_packing);
  EXPECT_TRUE(p.is_cover);
  EXPECT_THROW(greedy_maximal_packing(c, 0.0), ValidationError);
  EXPECT_THROW(greedy_maximal_packing(c, -1.0), ValidationError);
}

TEST(InnerMinGap, IdentitiesAndValidation) {
  const SyntheticClass c = build_synthetic_class("quadratic-bowls", 41, 21, 7.0, 1);
  std::vector<int> full(c.n_phi());
  std::iota(full.begin(), full.end(), 0);
  for (int t = 0; t < c.n_theta(); ++t) EXPECT_EQ(inner_min_gap(c, full, t), 0.0);

  const std::vector<int> singleton = {7};
  const int t = 4;
  double row_min = c.R[t][0];
  for (double v : c.R[t]) row_min = std::min(row_min, v);
  EXPECT_DOUBLE_EQ(inner_min_gap(c, singleton, t), c.R[t][7] - row_min);

  EXPECT_THROW(inner_min_gap(c, std::vector<int>{}, 0), ValidationError);
  EXPECT_THROW(inner_min_gap(c, singleton, -1), ValidationError);
  EXPECT_THROW(inner_min_gap(c, singleton, c.n_theta()), ValidationError);
}

TEST(SampleBound, ClosedFormValueAndEdges) {
  // x = (1/10) * 1 = 0.1: ceil(ln 0.05 / ln 0.9) = ceil(28.433...) = 29.
  EXPECT_EQ(theorem2_sample_bound(0.05, 1.0, 1.0, 10.0), 29);
  // Vanishing confidence requirement: a single sample suffices.
  EXPECT_EQ(theorem2_sample_bound(0.999999, 1.0, 1.0, 10.0), 1);
  // Halving delta increases m at these parameters.
  EXPECT_EQ(theorem2_sample_bound(0.025, 1.0, 1.0, 10.0), 36);
  for (double delta : {0.3, 0.05, 0.01})
    EXPECT_GE(theorem2_sample_bound(delta / 2, 1.0, 1.0, 10.0),
              theorem2_sample_bound(delta, 1.0, 1.0, 10.0));

  EXPECT_THROW(theorem2_sample_bound(0.0, 1.0, 1.0, 10.0), ValidationError);
  EXPECT_THROW(theorem2_sample_bound(1.0, 1.0, 1.0, 10.0), ValidationError);
  EXPECT_THROW(theorem2_sample_bound(0.05, 20.0, 1.0, 10.0), ValidationError);  // x = 2
  EXPECT_THROW(theorem2_sample_bound(0.05, -1.0, 1.0, 10.0), ValidationError);
  EXPECT_THROW(theorem2_sample_bound(0.05, 1.0, 0.0, 10.0), ValidationError);
  EXPECT_THROW(theorem2_sample_bound(0.05, 1.0, 1.0, -1.0), ValidationError);
}

TEST(SampleBound, AgreesWithDirectIncrementLoop) {
  const auto loop_oracle = [](double delta, double x) {
    int m = 1;
    double acc = 1.0 - x;
    while (acc > delta) {
      acc *= 1.0 - x;
      ++m;
    }
    return m;
  };
  for (double delta : {0.3, 0.05, 0.01, 0.002})
    for (double x : {0.02, 0.1, 0.37, 0.9})
      EXPECT_EQ(theorem2_sample_bound(delta, x, 1.0, 1.0), loop_oracle(delta, x))
          << "delta=" << delta << " x=" << x;
}

// Measured Lipschitz constant of R(theta_mid, .) for the 201-point
// quadratic class, computed the same way a caller would: max slope over
// all grid pairs.
double measured_l_at_mid(const SyntheticClass& c) {
  const auto& row = c.R[c.n_theta() / 2];
  double l = 0.0;
  for (int i = 0; i < c.n_phi(); ++i)
    for (int j = i + 1; j < c.n_phi(); ++j) {
      const double gap = euclid(c.phi_points[i], c.phi_points[j]);
      if (gap > 0.0) l = std::max(l, std::abs(row[i] - row[j]) / gap);
    }
  return l;
}

TEST(EmpiricalCheck, MeetsTheGuaranteeWithValidatedPremise) {
  const SyntheticClass c = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 1);
  const std::vector<double> uniform(c.n_phi(), 1.0);
  const double l_hat = measured_l_at_mid(c);
  EXPECT_NEAR(l_hat, 1.99, 1e-9);
  const double l_sigma = 0.25;
  const double eps = 0.1 * l_hat / l_sigma;  // ratio 0.1 => m = 29
  const double rate = theorem2_empirical_check(c, uniform, l_sigma, 0.05, eps, 400, 2026);
  EXPECT_GE(rate, 0.92);
  EXPECT_LE(rate, 1.0);
  // Deterministic under the seed, and independent of the worker count.
  EXPECT_EQ(rate, theorem2_empirical_check(c, uniform, l_sigma, 0.05, eps, 400, 2026));
  set_threads(4);
  const double threaded = theorem2_empirical_check(c, uniform, l_sigma, 0.05, eps, 400, 2026);
  set_threads(1);
  EXPECT_EQ(rate, threaded);
}

TEST(EmpiricalCheck, InflatedSampleCountNeverHurts) {
  const SyntheticClass c = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 1);
  const std::vector<double> uniform(c.n_phi(), 1.0);
  const double l_hat = measured_l_at_mid(c);
  const double eps = 0.1 * l_hat / 0.25;
  const double base = theorem2_empirical_check(c, uniform, 0.25, 0.05, eps, 400, 77);
  const double inflated =
      theorem2_empirical_check(c, uniform, 0.25, 0.05, eps, 400, 77, 290);
  EXPECT_GE(inflated, base);
}

TEST(EmpiricalCheck, EpsilonAtRadiusAlwaysSucceeds) {
  const SyntheticClass c = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 1);
  const std::vector<double> uniform(c.n_phi(), 1.0);
  // eps = r_max keeps the bound's ratio below 1 only for small l_sigma.
  const double rate = theorem2_empirical_check(c, uniform, 0.1, 0.05, c.r_max, 100, 5);
  EXPECT_EQ(rate, 1.0);
}

TEST(EmpiricalCheck, RejectsBadSigmaAndViolatedPremise) {
  const SyntheticClass c = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 1);
  const std::vector<double> uniform(c.n_phi(), 1.0);
  const double eps = 0.1 * measured_l_at_mid(c) / 0.25;

  // All mass on phi >= 0 while the chosen minimizer sits at phi = -1.
  std::vector<double> away(c.n_phi(), 0.0);
  for (int i = 0; i < c.n_phi(); ++i)
    if (c.phi_points[i][0] >= 0.0) away[i] = 1.0;
  try {
    theorem2_empirical_check(c, away, 0.25, 0.05, eps, 10, 1);
    FAIL() << "premise violation not detected";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("density premise"), std::string::npos);
    EXPECT_NE(msg.find("eps'="), std::string::npos);
  }

  EXPECT_THROW(theorem2_empirical_check(c, std::vector<double>(5, 1.0), 0.25, 0.05, eps, 10, 1),
               ValidationError);
  std::vector<double> negative(c.n_phi(), 1.0);
  negative[3] = -0.5;
  EXPECT_THROW(theorem2_empirical_check(c, negative, 0.25, 0.05, eps, 10, 1), ValidationError);
  EXPECT_THROW(theorem2_empirical_check(c, std::vector<double>(c.n_phi(), 0.0), 0.25, 0.05, eps, 10, 1),
               ValidationError);
  EXPECT_THROW(theorem2_empirical_check(c, uniform, 0.25, 0.05, eps, 0, 1), ValidationError);
}

SyntheticClass single_row_class(std::vector<double> row) {
  SyntheticClass c;
  for (std::size_t i = 0; i < row.size(); ++i)
    c.phi_points.push_back({static_cast<double>(i)});
  c.theta_points = {0.0};
  c.R = {std::move(row)};
  return c;
}

TEST(Lemma1, SmallColumnsExhaustive) {
  const SyntheticClass c = single_row_class({5.0, 3.0, 8.0});
  EXPECT_TRUE(lemma1_check(c, 1, 0));
  EXPECT_TRUE(lemma1_check(c, 2, 0));
  EXPECT_TRUE(lemma1_check(c, 3, 0));  // m = |phi grid|

  // 12-point random column, m = 3: all C(12,3) = 220 subsets enumerated.
  Rng rng(31);
  std::vector<double> row(12);
  for (double& v : row) v = rng.uniform(-5.0, 5.0);
  EXPECT_TRUE(lemma1_check(single_row_class(row), 3, 0));

  try {
    lemma1_check(c, 4, 0);
    FAIL() << "out-of-range m not rejected";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("m="), std::string::npos);
    EXPECT_NE(msg.find("n_phi="), std::string::npos);
  }
  EXPECT_THROW(lemma1_check(c, 0, 0), ValidationError);
  EXPECT_THROW(lemma1_check(c, 1, 1), ValidationError);
}

TEST(Lemma1, HoldsAcrossModesAndClasses) {
  // Exhaustive mode over every theta.
  const SyntheticClass small = build_synthetic_class("lipschitz-bumps", 10, 8, 2.0, 4);
  for (int m = 1; m <= 3; ++m)
    for (int t = 0; t < small.n_theta(); ++t) EXPECT_TRUE(lemma1_check(small, m, t));

  // C(200, 3) = 1,313,400 forces the randomized mode with the witness subset.
  const SyntheticClass big = build_synthetic_class("lipschitz-bumps", 200, 12, 2.0, 8);
  EXPECT_TRUE(lemma1_check(big, 3, big.n_theta() / 2));
  EXPECT_TRUE(lemma1_check(big, 3, 0));

  const SyntheticClass quad = build_synthetic_class("quadratic-bowls", 201, 31, 7.0, 1);
  EXPECT_TRUE(lemma1_check(quad, 5, quad.n_theta() / 2));
}

}  // namespace
}  // namespace rolah
