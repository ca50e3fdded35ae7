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
// Robustness evaluation of frozen policies: mass x friction coefficient
// grids, the disturbance suite (none / action noise / worst adversary),
// cross-validation of agents against adversaries from other runs, return
// normalization, and CSV export.

#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rolah/env.hpp"
#include "rolah/errors.hpp"
#include "rolah/policy.hpp"
#include "rolah/rollout.hpp"
#include "rolah/textio.hpp"

namespace rolah {

// Seed of the fixed random-parameter reference policy that anchors the low
// end of return normalization.
inline constexpr std::uint64_t kReferencePolicySeed = 0x5EEDBA5E;

struct GridSpec {
  std::vector<double> mass_coeffs;
  std::vector<double> friction_coeffs;
  std::vector<std::uint64_t> seeds;
  int episodes_per_cell = 8;
};

// 5x5 coefficients log-spaced over [0.5, 2.0] (ratio sqrt(2), middle cell
// exactly nominal), 5 seeds.
inline GridSpec default_grid_spec() {
  GridSpec spec;
  spec.mass_coeffs = {0.5, std::sqrt(0.5), 1.0, std::sqrt(2.0), 2.0};
  spec.friction_coeffs = spec.mass_coeffs;
  spec.seeds = {0, 1, 2, 3, 4};
  return spec;
}

inline void validate(const GridSpec& spec) {
  if (spec.mass_coeffs.empty()) throw ValidationError("mass_coeffs must be nonempty");
  if (spec.friction_coeffs.empty())
    throw ValidationError("friction_coeffs must be nonempty");
  if (spec.seeds.empty()) throw ValidationError("seeds must be nonempty");
  for (double c : spec.mass_coeffs)
    if (!(c > 0.0))
      throw ValidationError("mass_coeffs must be positive, got " +
                            internal::format_g17(c));
  for (double c : spec.friction_coeffs)
    if (!(c > 0.0))
      throw ValidationError("friction_coeffs must be positive, got " +
                            internal::format_g17(c));
  if (spec.episodes_per_cell < 1)
    throw ValidationError("episodes_per_cell must be at least 1, got " +
                          std::to_string(spec.episodes_per_cell));
}

// Normalization references recorded with every grid report: R_lo anchors at
// a fixed random-parameter policy, R_hi at the best undisturbed mean among
// the agents being compared.
struct NormRefs {
  double r_lo = 0.0;
  double r_hi = 1.0;
};

struct GridRow {
  double mass_coeff = 0.0;
  double friction_coeff = 0.0;
  std::uint64_t seed = 0;
  double mean_return = 0.0;
  double normalized_return = 0.0;
};

struct GridResult {
  std::vector<GridRow> rows;
  NormRefs refs;
};

// Affine map x -> (x - r_lo)/(r_hi - r_lo); deliberately not clamped so
// out-of-reference values stay visible.
inline std::vector<double> normalize_returns(std::span<const double> raw,
                                             double r_lo, double r_hi) {
  if (!(r_hi > r_lo))
    throw ValidationError("normalization needs R_hi > R_lo, got R_lo=" +
                          internal::format_g17(r_lo) + " R_hi=" +
                          internal::format_g17(r_hi));
  std::vector<double> out;
  out.reserve(raw.size());
  for (double x : raw) out.push_back((x - r_lo) / (r_hi - r_lo));
  return out;
}

// Undisturbed mean return at the given params, averaged over the seeds.
inline double undisturbed_mean(const PolicyParams& agent,
                               const std::string& env_id,
                               const EnvParams& params, int episodes,
                               double gamma, std::span<const std::uint64_t> seeds) {
  double total = 0.0;
  for (std::uint64_t s : seeds)
    total += estimate_R(agent, RolloutOptions{}, env_id, params, episodes, gamma, s)
                 .mean_return;
  return total / static_cast<double>(seeds.size());
}

inline NormRefs compute_norm_refs(std::span<const PolicyParams> agents,
                                  const std::string& env_id,
                                  const EnvParams& params, int episodes,
                                  double gamma,
                                  std::span<const std::uint64_t> seeds) {
  if (agents.empty()) throw ValidationError("compute_norm_refs needs at least one agent");
  if (seeds.empty()) throw ValidationError("compute_norm_refs needs at least one seed");
  const ActionSpec spec = action_spec(env_id, params);
  MlpShapes shapes;
  shapes.dims = {spec.obs_dim, 32, 32, spec.agent_dim()};
  const PolicyParams reference = init_policy(shapes, kReferencePolicySeed);
  NormRefs refs;
  refs.r_lo = undisturbed_mean(reference, env_id, params, episodes, gamma, seeds);
  refs.r_hi = undisturbed_mean(agents[0], env_id, params, episodes, gamma, seeds);
  for (std::size_t i = 1; i < agents.size(); ++i)
    refs.r_hi = std::max(
        refs.r_hi, undisturbed_mean(agents[i], env_id, params, episodes, gamma, seeds));
  return refs;
}

// Evaluates the frozen agent with a zero adversary at every
// (mass, friction, seed) cell; mass outermost, then friction, then seed.
// The cell at coefficients (1.0, 1.0) reproduces estimate_R at the base
// params with the same seed exactly.
inline GridResult eval_grid(const PolicyParams& agent, const std::string& env_id,
                            const EnvParams& base_params, const GridSpec& spec,
                            double gamma, const NormRefs& refs) {
  validate(spec);
  GridResult out;
  out.refs = refs;
  std::vector<double> raw;
  for (double mass : spec.mass_coeffs)
    for (double friction : spec.friction_coeffs)
      for (std::uint64_t seed : spec.seeds) {
        EnvParams cell = base_params;
        cell.mass_coeff = mass;
        cell.friction_coeff = friction;
        GridRow row;
        row.mass_coeff = mass;
        row.friction_coeff = friction;
        row.seed = seed;
        row.mean_return = estimate_R(agent, RolloutOptions{}, env_id, cell,
                                     spec.episodes_per_cell, gamma, seed)
                              .mean_return;
        raw.push_back(row.mean_return);
        out.rows.push_back(row);
      }
  const std::vector<double> normed = normalize_returns(raw, refs.r_lo, refs.r_hi);
  for (std::size_t i = 0; i < out.rows.size(); ++i)
    out.rows[i].normalized_return = normed[i];
  return out;
}

inline GridResult eval_grid(const PolicyParams& agent, const std::string& env_id,
                            const EnvParams& base_params, const GridSpec& spec,
                            double gamma) {
  validate(spec);
  const NormRefs refs =
      compute_norm_refs(std::span<const PolicyParams>(&agent, 1), env_id,
                        base_params, spec.episodes_per_cell, gamma, spec.seeds);
  return eval_grid(agent, env_id, base_params, spec, gamma, refs);
}

// Disturbance applied at evaluation time: nothing, i.i.d. Gaussian noise on
// the agent's action (pre-clip), or a frozen worst-case adversary policy.
struct DisturbanceSuite {
  enum class Kind { kNone, kActionNoise, kWorstAdversary };
  Kind kind = Kind::kNone;
  double noise_std = 0.1;
  const PolicyParams* adversary = nullptr;

  static DisturbanceSuite none() { return {}; }
  static DisturbanceSuite action_noise(double noise_std = 0.1) {
    DisturbanceSuite s;
    s.kind = Kind::kActionNoise;
    s.noise_std = noise_std;
    return s;
  }
  static DisturbanceSuite worst_adversary(const PolicyParams& adversary) {
    DisturbanceSuite s;
    s.kind = Kind::kWorstAdversary;
    s.adversary = &adversary;
    return s;
  }
};

inline ReturnEstimate eval_disturbance(const PolicyParams& agent,
                                       const DisturbanceSuite& suite,
                                       const std::string& env_id,
                                       const EnvParams& params, int episodes,
                                       double gamma, std::uint64_t seed) {
  RolloutOptions opts;
  switch (suite.kind) {
    case DisturbanceSuite::Kind::kNone:
      break;
    case DisturbanceSuite::Kind::kActionNoise:
      if (!(suite.noise_std >= 0.0))
        throw ValidationError("noise_std must be >= 0, got " +
                              internal::format_g17(suite.noise_std));
      opts.action_noise_std = suite.noise_std;
      break;
    case DisturbanceSuite::Kind::kWorstAdversary:
      if (suite.adversary == nullptr)
        throw ValidationError("worst_adversary suite needs an adversary policy");
      opts.adversary = suite.adversary;
      break;
  }
  return estimate_R(agent, opts, env_id, params, episodes, gamma, seed);
}

// Full agents x adversaries matrix; every cell evaluated with the same
// episode seeds so columns are comparable.
inline std::vector<std::vector<ReturnEstimate>> cross_validate(
    std::span<const PolicyParams> agents, std::span<const PolicyParams> adversaries,
    const std::string& env_id, const EnvParams& params, int episodes, double gamma,
    std::uint64_t seed) {
  if (agents.empty()) throw ValidationError("cross_validate needs at least one agent");
  if (adversaries.empty())
    throw ValidationError("cross_validate needs at least one adversary");
  std::vector<std::vector<ReturnEstimate>> matrix(agents.size());
  for (std::size_t a = 0; a < agents.size(); ++a) {
    matrix[a].reserve(adversaries.size());
    for (std::size_t d = 0; d < adversaries.size(); ++d)
      matrix[a].push_back(
          estimate_R(agents[a], adversaries[d], env_id, params, episodes, gamma, seed));
  }
  return matrix;
}

inline void write_grid_csv(std::ostream& out, const GridResult& result) {
  out << "# refs R_lo=" << internal::format_g17(result.refs.r_lo)
      << " R_hi=" << internal::format_g17(result.refs.r_hi) << "\n";
  out << "mass_coeff,friction_coeff,seed,mean_return,normalized_return\n";
  for (const GridRow& row : result.rows)
    out << internal::format_g17(row.mass_coeff) << ","
        << internal::format_g17(row.friction_coeff) << "," << row.seed << ","
        << internal::format_g17(row.mean_return) << ","
        << internal::format_g17(row.normalized_return) << "\n";
}

inline void write_cross_csv(std::ostream& out,
                            const std::vector<std::vector<ReturnEstimate>>& matrix,
                            std::uint64_t seed) {
  out << "agent_id,adversary_id,seed,mean_return\n";
  for (std::size_t a = 0; a < matrix.size(); ++a)
    for (std::size_t d = 0; d < matrix[a].size(); ++d)
      out << a << "," << d << "," << seed << ","
          << internal::format_g17(matrix[a][d].mean_return) << "\n";
}

namespace internal {

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open \"" + path + "\" for writing");
  return out;
}

}  // namespace internal

inline void write_grid_csv(const std::string& path, const GridResult& result) {
  std::ofstream out = internal::open_csv(path);
  write_grid_csv(out, result);
  if (!out) throw ConfigError("failed while writing \"" + path + "\"");
}

inline void write_cross_csv(const std::string& path,
                            const std::vector<std::vector<ReturnEstimate>>& matrix,
                            std::uint64_t seed) {
  std::ofstream out = internal::open_csv(path);
  write_cross_csv(out, matrix, seed);
  if (!out) throw ConfigError("failed while writing \"" + path + "\"");
}

}  // namespace rolah
