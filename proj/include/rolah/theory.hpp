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
// Desk-scale verification of the approximation theory behind worst-case
// training over a sampled adversary set. Everything runs on finite tabulated
// function classes so packings, covers, argmins, and sup-norms are exact
// enumerations, not floating suprema:
//
//   * a maximal epsilon-packing of the class is also an epsilon-cover, and
//     minimizing over the packing instead of the whole class costs at most
//     epsilon at every theta;
//   * drawing m samples from a distribution with enough mass near the
//     minimizer, with m from the closed-form bound, lands within epsilon of
//     the true inner minimum with probability at least 1 - delta;
//   * the min over all size-m subsets of within-subset minima equals the
//     global minimum.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rolah/errors.hpp"
#include "rolah/parallel.hpp"
#include "rolah/rng.hpp"
#include "rolah/textio.hpp"

namespace rolah {

// Tabulated finite class {R(theta, phi)} with its function-space metric
// d(phi, phi') = max over the theta grid of |R(theta,phi) - R(theta,phi')|
// (a lower bound on the continuum sup-norm). phi_points live in a
// low-dimensional box; lipschitz bounds d by lipschitz * |phi - phi'|.
struct SyntheticClass {
  std::vector<std::vector<double>> phi_points;
  std::vector<double> theta_points;
  std::vector<std::vector<double>> R;     // R[theta_index][phi_index]
  std::vector<std::vector<double>> dist;  // function-space metric, phi x phi
  double r_max = 0.0;                     // metric radius of the class
  double lipschitz = 0.0;                 // the verified bound

  int n_phi() const { return static_cast<int>(phi_points.size()); }
  int n_theta() const { return static_cast<int>(theta_points.size()); }
};

namespace internal {

inline double phi_distance(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double sq = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) sq += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(sq);
}

inline void finish_class(SyntheticClass& c) {
  const int n = c.n_phi();
  c.dist.assign(n, std::vector<double>(n, 0.0));
  c.r_max = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (int t = 0; t < c.n_theta(); ++t)
        d = std::max(d, std::abs(c.R[t][i] - c.R[t][j]));
      c.dist[i][j] = c.dist[j][i] = d;
      c.r_max = std::max(c.r_max, d);
    }
  }
  // The promised Lipschitz bound must actually hold on the table.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double gap = phi_distance(c.phi_points[i], c.phi_points[j]);
      if (c.dist[i][j] > c.lipschitz * gap + 1e-9)
        throw ValidationError(
            "class is not " + format_g17(c.lipschitz) +
            "-Lipschitz: d=" + format_g17(c.dist[i][j]) + " at phi gap " +
            format_g17(gap));
    }
  }
}

}  // namespace internal

// lipschitz-bumps: n_phi scattered points in the box [0,1]^2, theta on
// [0,1]; R is a sum of sinusoid products with coefficients scaled so the
// class is (0.9 * l_phi)-Lipschitz in phi by construction. quadratic-bowls:
// R(theta, phi) = -(theta - phi)^2 on theta in [-2.5, 2.5], phi in [-1, 1];
// pass l_phi >= 7 (= 2 * max|theta - phi|).
inline SyntheticClass build_synthetic_class(const std::string& family,
                                            int n_phi, int n_theta,
                                            double l_phi, std::uint64_t seed) {
  if (n_phi < 1 || n_phi > 10000)
    throw ValidationError("n_phi must lie in [1, 10000], got " +
                          std::to_string(n_phi));
  if (n_theta < 1 || n_theta > 1000)
    throw ValidationError("n_theta must lie in [1, 1000], got " +
                          std::to_string(n_theta));
  if (!(l_phi >= 0.0))
    throw ValidationError("l_phi must be non-negative, got " +
                          std::to_string(l_phi));
  SyntheticClass c;
  c.lipschitz = l_phi;
  if (family == "lipschitz-bumps") {
    Rng rng(seed);
    c.phi_points.reserve(n_phi);
    for (int i = 0; i < n_phi; ++i)
      c.phi_points.push_back({rng.uniform(), rng.uniform()});
    c.theta_points.resize(n_theta);
    for (int t = 0; t < n_theta; ++t)
      c.theta_points[t] =
          n_theta == 1 ? 0.5 : static_cast<double>(t) / (n_theta - 1);

    constexpr int kBumps = 4;
    std::vector<double> coeff(kBumps), omega(kBumps), psi(kBumps);
    std::vector<double> u(kBumps), v(kBumps), rho(kBumps);
    double weight = 0.0;
    for (int b = 0; b < kBumps; ++b) {
      coeff[b] = rng.uniform(-1.0, 1.0);
      omega[b] = rng.uniform(0.5, 2.5);
      psi[b] = rng.uniform(0.0, 6.28);
      u[b] = rng.uniform(0.5, 2.5);
      v[b] = rng.uniform(0.5, 2.5);
      rho[b] = rng.uniform(0.0, 6.28);
      weight += std::abs(coeff[b]) * std::sqrt(u[b] * u[b] + v[b] * v[b]);
    }
    // |R(.,phi) - R(.,phi')| <= sum |c_b| * |grad| * |phi - phi'|; scale the
    // coefficients so that sum collapses to 0.9 * l_phi.
    const double scale = weight > 0.0 ? 0.9 * l_phi / weight : 0.0;
    for (auto& cb : coeff) cb *= scale;

    c.R.assign(n_theta, std::vector<double>(n_phi, 0.0));
    for (int t = 0; t < n_theta; ++t) {
      for (int i = 0; i < n_phi; ++i) {
        double val = 0.0;
        for (int b = 0; b < kBumps; ++b)
          val += coeff[b] * std::sin(omega[b] * c.theta_points[t] + psi[b]) *
                 std::cos(u[b] * c.phi_points[i][0] +
                          v[b] * c.phi_points[i][1] + rho[b]);
        c.R[t][i] = val;
      }
    }
  } else if (family == "quadratic-bowls") {
    c.phi_points.reserve(n_phi);
    for (int i = 0; i < n_phi; ++i) {
      const double phi =
          n_phi == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / (n_phi - 1);
      c.phi_points.push_back({phi});
    }
    c.theta_points.resize(n_theta);
    for (int t = 0; t < n_theta; ++t)
      c.theta_points[t] =
          n_theta == 1 ? 0.0
                       : -2.5 + 5.0 * static_cast<double>(t) / (n_theta - 1);
    c.R.assign(n_theta, std::vector<double>(n_phi, 0.0));
    for (int t = 0; t < n_theta; ++t)
      for (int i = 0; i < n_phi; ++i) {
        const double diff = c.theta_points[t] - c.phi_points[i][0];
        c.R[t][i] = -diff * diff;
      }
  } else {
    throw ConfigError("unknown synthetic family \"" + family +
                      "\"; known: lipschitz-bumps, quadratic-bowls");
  }
  internal::finish_class(c);
  return c;
}

struct PackingResult {
  std::vector<int> selected;
  double epsilon = 0.0;
  bool is_packing = false;
  bool is_cover = false;
  bool is_maximal = false;
};

// Greedy in ascending index order: add a point iff it is strictly more than
// epsilon from everything already selected. The three flags are then
// re-derived as literal quantifier checks over the grid, independently of
// how the selection was built.
inline PackingResult greedy_maximal_packing(const SyntheticClass& c,
                                            double epsilon) {
  if (!(epsilon > 0.0))
    throw ValidationError("epsilon must be positive, got " +
                          internal::format_g17(epsilon));
  PackingResult out;
  out.epsilon = epsilon;
  const int n = c.n_phi();
  for (int i = 0; i < n; ++i) {
    bool far = true;
    for (int s : out.selected)
      if (c.dist[i][s] <= epsilon) {
        far = false;
        break;
      }
    if (far) out.selected.push_back(i);
  }

  out.is_packing = true;
  for (std::size_t a = 0; a < out.selected.size() && out.is_packing; ++a)
    for (std::size_t b = a + 1; b < out.selected.size(); ++b)
      if (c.dist[out.selected[a]][out.selected[b]] <= epsilon) {
        out.is_packing = false;
        break;
      }

  out.is_cover = true;
  for (int i = 0; i < n && out.is_cover; ++i) {
    bool covered = false;
    for (int s : out.selected)
      if (c.dist[i][s] <= epsilon) {
        covered = true;
        break;
      }
    if (!covered) out.is_cover = false;
  }

  // Maximal: no unselected point could be added without breaking the
  // packing property.
  out.is_maximal = true;
  std::vector<char> in_set(n, 0);
  for (int s : out.selected) in_set[s] = 1;
  for (int i = 0; i < n && out.is_maximal; ++i) {
    if (in_set[i]) continue;
    bool blocked = false;
    for (int s : out.selected)
      if (c.dist[i][s] <= epsilon) {
        blocked = true;
        break;
      }
    if (!blocked) out.is_maximal = false;
  }
  return out;
}

// R(theta, argmin over the packing) - R(theta, argmin over the grid) >= 0;
// the quantity the net construction bounds by epsilon.
inline double inner_min_gap(const SyntheticClass& c,
                            std::span<const int> packing, int theta_index) {
  if (packing.empty())
    throw ValidationError("inner_min_gap needs a nonempty packing");
  if (theta_index < 0 || theta_index >= c.n_theta())
    throw ValidationError("theta_index out of range: " +
                          std::to_string(theta_index));
  const std::vector<double>& row = c.R[theta_index];
  double full = row[0];
  for (double v : row) full = std::min(full, v);
  double over_packing = row[packing[0]];
  for (int i : packing) over_packing = std::min(over_packing, row[i]);
  return over_packing - full;
}

// Smallest m with (1 - (l_sigma/l_phi) * epsilon)^m <= delta.
inline int theorem2_sample_bound(double delta, double epsilon, double l_sigma,
                                 double l_phi) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ValidationError("delta must lie in (0, 1), got " +
                          internal::format_g17(delta));
  if (!(l_phi > 0.0) || !(l_sigma > 0.0) || !(epsilon > 0.0))
    throw ValidationError("epsilon, l_sigma and l_phi must be positive");
  const double x = (l_sigma / l_phi) * epsilon;
  if (!(x > 0.0 && x < 1.0))
    throw ValidationError("(l_sigma/l_phi)*epsilon must lie in (0, 1), got " +
                          internal::format_g17(x));
  const double raw = std::log(delta) / std::log(1.0 - x);
  return std::max(1, static_cast<int>(std::ceil(raw)));
}

// Monte-Carlo side of the sampling bound, at the middle theta grid point.
// The per-theta Lipschitz constant is measured on the grid; the premise
// that sigma puts at least l_sigma * eps' of its mass within phi-distance
// eps' = epsilon / L_measured of the minimizer is verified before any
// trial runs. Each trial draws m = theorem2_sample_bound(...) phi's i.i.d.
// from sigma and succeeds when the best of them is within epsilon of the
// true minimum. m_override > 0 replaces the bound's m (e.g. to rerun with
// an inflated sample count).
inline double theorem2_empirical_check(const SyntheticClass& c,
                                       std::span<const double> sigma,
                                       double l_sigma, double delta,
                                       double epsilon, int trials,
                                       std::uint64_t seed,
                                       int m_override = 0) {
  if (static_cast<int>(sigma.size()) != c.n_phi())
    throw ValidationError("sigma has " + std::to_string(sigma.size()) +
                          " weights for " + std::to_string(c.n_phi()) +
                          " phi points");
  if (trials < 1)
    throw ValidationError("trials must be at least 1, got " +
                          std::to_string(trials));
  double total = 0.0;
  for (double w : sigma) {
    if (!(w >= 0.0)) throw ValidationError("sigma weights must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("sigma must have positive mass");

  const int theta_index = c.n_theta() / 2;
  const std::vector<double>& row = c.R[theta_index];
  int phi_star = 0;
  for (int i = 1; i < c.n_phi(); ++i)
    if (row[i] < row[phi_star]) phi_star = i;

  // Grid-measured Lipschitz constant of R(theta_fixed, .) in phi.
  double l_measured = 0.0;
  for (int i = 0; i < c.n_phi(); ++i)
    for (int j = i + 1; j < c.n_phi(); ++j) {
      const double gap =
          internal::phi_distance(c.phi_points[i], c.phi_points[j]);
      if (gap > 0.0)
        l_measured = std::max(l_measured, std::abs(row[i] - row[j]) / gap);
    }
  if (!(l_measured > 0.0))
    throw ValidationError("degenerate class: measured Lipschitz constant 0");

  const double eps_prime = epsilon / l_measured;
  double ball_mass = 0.0;
  for (int i = 0; i < c.n_phi(); ++i)
    if (internal::phi_distance(c.phi_points[i], c.phi_points[phi_star]) <=
        eps_prime)
      ball_mass += sigma[i] / total;
  if (ball_mass + 1e-12 < l_sigma * eps_prime)
    throw ValidationError(
        "density premise fails at eps'=" + internal::format_g17(eps_prime) +
        ": mass " + internal::format_g17(ball_mass) + " < required " +
        internal::format_g17(l_sigma * eps_prime));

  const int m = m_override > 0
                    ? m_override
                    : theorem2_sample_bound(delta, epsilon, l_sigma, l_measured);
  std::vector<double> cdf(sigma.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    acc += sigma[i] / total;
    cdf[i] = acc;
  }
  cdf.back() = 1.0;

  const double full_min = row[phi_star];
  std::vector<char> success(trials, 0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t trial) {
    Rng rng(split_seed(seed, trial));
    double best = std::numeric_limits<double>::infinity();
    for (int draw = 0; draw < m; ++draw) {
      const double u = rng.uniform();
      const int idx = static_cast<int>(
          std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      best = std::min(best, row[std::min(idx, c.n_phi() - 1)]);
    }
    success[trial] = (best - full_min) <= epsilon + 1e-12 ? 1 : 0;
  });
  int hits = 0;
  for (char s : success) hits += s;
  return static_cast<double>(hits) / static_cast<double>(trials);
}

namespace internal {

// C(n, m) capped at just above the exhaustive-enumeration budget.
inline long long binomial_capped(int n, int m, long long cap) {
  if (m < 0 || m > n) return 0;
  m = std::min(m, n - m);
  long long result = 1;
  for (int i = 1; i <= m; ++i) {
    result = result * (n - m + i) / i;
    if (result > cap) return cap + 1;
  }
  return result;
}

}  // namespace internal

// Verifies that minimizing over size-m subsets recovers the global column
// minimum: exhaustively when C(n, m) <= 1e5, otherwise over 1,000 seeded
// random subsets plus the witness subset containing the argmin.
inline bool lemma1_check(const SyntheticClass& c, int m, int theta_index) {
  if (theta_index < 0 || theta_index >= c.n_theta())
    throw ValidationError("theta_index out of range: " +
                          std::to_string(theta_index));
  const int n = c.n_phi();
  if (m < 1 || m > n)
    throw ValidationError("m must lie in [1, n_phi]: m=" + std::to_string(m) +
                          ", n_phi=" + std::to_string(n));
  const std::vector<double>& row = c.R[theta_index];
  int argmin = 0;
  for (int i = 1; i < n; ++i)
    if (row[i] < row[argmin]) argmin = i;
  const double full_min = row[argmin];

  const auto subset_min = [&](std::span<const int> subset) {
    double v = row[subset[0]];
    for (int i : subset) v = std::min(v, row[i]);
    return v;
  };

  double best = std::numeric_limits<double>::infinity();
  if (internal::binomial_capped(n, m, 100000) <= 100000) {
    std::vector<int> subset(m);
    std::iota(subset.begin(), subset.end(), 0);
    while (true) {
      best = std::min(best, subset_min(subset));
      // Next combination in lexicographic order.
      int i = m - 1;
      while (i >= 0 && subset[i] == n - m + i) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j < m; ++j) subset[j] = subset[j - 1] + 1;
    }
  } else {
    Rng rng(split_seed(0x1E44A1, static_cast<std::uint64_t>(theta_index)));
    std::vector<int> pool(n);
    for (int trial = 0; trial < 1000; ++trial) {
      std::iota(pool.begin(), pool.end(), 0);
      for (int j = 0; j < m; ++j) {
        const int pick = j + static_cast<int>(rng.next_u64() % (n - j));
        std::swap(pool[j], pool[pick]);
      }
      best = std::min(best, subset_min(std::span<const int>(pool.data(), m)));
    }
    // The witness subset {argmin, 0, 1, ...} pins the lower side.
    std::vector<int> witness;
    witness.push_back(argmin);
    for (int i = 0; witness.size() < static_cast<std::size_t>(m); ++i)
      if (i != argmin) witness.push_back(i);
    best = std::min(best, subset_min(witness));
  }
  // Every subset min is >= the global min by construction; equality needs
  // some subset to reach it.
  return best == full_min;
}

}  // namespace rolah
