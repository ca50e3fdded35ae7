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
// Trajectory collection for agent-vs-adversary play, return estimation,
// GAE advantages, and a linear value baseline.
//
// Seed scheme: episode e of a collect call derives es = split(seed, e) and
// then uses four independent streams: split(es, 0) resets the env,
// split(es, 1) drives the agent, split(es, 2) the adversary, split(es, 3)
// evaluation action noise. Episodes therefore reproduce bit-identically
// whatever the thread count or collection order.

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rolah/env.hpp"
#include "rolah/errors.hpp"
#include "rolah/parallel.hpp"
#include "rolah/policy.hpp"
#include "rolah/rng.hpp"

namespace rolah {

// a_p is the protagonist's sampled action (log_prob_p is its density);
// evaluation noise, when enabled, perturbs what the env receives but not
// the stored sample. reward is the protagonist's; the antagonist's is its
// negation, applied downstream.
struct Transition {
  std::vector<double> obs;
  std::vector<double> a_p;
  std::vector<double> a_a;
  double reward = 0.0;
  double log_prob_p = 0.0;
  double log_prob_a = 0.0;
};

struct Trajectory {
  std::vector<Transition> transitions;
  int length() const { return static_cast<int>(transitions.size()); }
};

struct ReturnEstimate {
  double mean_return = 0.0;
  std::vector<double> per_episode_returns;
  int n_episodes = 0;
};

// adversary == nullptr plays a hard zero disturbance (log_prob_a = 0);
// action_noise_std > 0 adds i.i.d. Gaussian noise to the protagonist's
// action before clipping, used by the evaluation suite only.
struct RolloutOptions {
  const PolicyParams* adversary = nullptr;
  double action_noise_std = 0.0;
};

inline std::vector<Trajectory> collect(const PolicyParams& agent,
                                       const RolloutOptions& opts,
                                       const std::string& env_id,
                                       const EnvParams& params, int n_episodes,
                                       std::uint64_t seed) {
  validate(params);
  validate(agent);
  if (opts.adversary) validate(*opts.adversary);
  if (n_episodes < 1)
    throw ValidationError("n_episodes must be at least 1, got " +
                          std::to_string(n_episodes));
  if (!(opts.action_noise_std >= 0.0))
    throw ValidationError("action_noise_std must be non-negative, got " +
                          std::to_string(opts.action_noise_std));
  const int adv_dim = action_spec(env_id, params).adversary_dim();

  std::vector<Trajectory> out(n_episodes);
  parallel_for(static_cast<std::size_t>(n_episodes), [&](std::size_t e) {
    const std::uint64_t es = split_seed(seed, e);
    EnvState s = reset(env_id, params, split_seed(es, 0));
    Rng agent_rng(split_seed(es, 1));
    Rng adv_rng(split_seed(es, 2));
    Rng noise_rng(split_seed(es, 3));
    Trajectory traj;
    traj.transitions.reserve(params.horizon);
    while (!s.terminated) {
      auto [a_p, lp_p] = sample_action(agent, s.observation, agent_rng);
      std::vector<double> a_a(adv_dim, 0.0);
      double lp_a = 0.0;
      if (opts.adversary) {
        auto [a, lp] = sample_action(*opts.adversary, s.observation, adv_rng);
        a_a = std::move(a);
        lp_a = lp;
      }
      std::vector<double> applied = a_p;
      if (opts.action_noise_std > 0.0) {
        for (auto& x : applied) x += opts.action_noise_std * noise_rng.normal();
      }
      auto [next, r] = step(env_id, s, applied, a_a, params);
      traj.transitions.push_back(
          {s.observation, std::move(a_p), std::move(a_a), r, lp_p, lp_a});
      s = std::move(next);
    }
    out[e] = std::move(traj);
  });
  return out;
}

inline std::vector<Trajectory> collect(const PolicyParams& agent,
                                       const PolicyParams& adversary,
                                       const std::string& env_id,
                                       const EnvParams& params, int n_episodes,
                                       std::uint64_t seed) {
  RolloutOptions opts;
  opts.adversary = &adversary;
  return collect(agent, opts, env_id, params, n_episodes, seed);
}

inline double discounted_return(std::span<const double> rewards,
                                double gamma) {
  if (rewards.empty())
    throw ValidationError("discounted_return needs at least one reward");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ValidationError("gamma must lie in [0, 1), got " +
                          std::to_string(gamma));
  double g = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) g = rewards[t] + gamma * g;
  return g;
}

inline std::vector<double> rewards_of(const Trajectory& traj) {
  std::vector<double> r;
  r.reserve(traj.transitions.size());
  for (const auto& tr : traj.transitions) r.push_back(tr.reward);
  return r;
}

inline ReturnEstimate estimate_R(const PolicyParams& agent,
                                 const RolloutOptions& opts,
                                 const std::string& env_id,
                                 const EnvParams& params, int n_episodes,
                                 double gamma, std::uint64_t seed) {
  const std::vector<Trajectory> trajs =
      collect(agent, opts, env_id, params, n_episodes, seed);
  ReturnEstimate est;
  est.n_episodes = n_episodes;
  est.per_episode_returns.reserve(trajs.size());
  for (const auto& t : trajs)
    est.per_episode_returns.push_back(discounted_return(rewards_of(t), gamma));
  double total = 0.0;
  for (double g : est.per_episode_returns) total += g;
  est.mean_return = total / static_cast<double>(n_episodes);
  return est;
}

inline ReturnEstimate estimate_R(const PolicyParams& agent,
                                 const PolicyParams& adversary,
                                 const std::string& env_id,
                                 const EnvParams& params, int n_episodes,
                                 double gamma, std::uint64_t seed) {
  RolloutOptions opts;
  opts.adversary = &adversary;
  return estimate_R(agent, opts, env_id, params, n_episodes, gamma, seed);
}

// GAE(gamma, lambda) via the backward recursion
//   A_t = delta_t + gamma*lambda*A_{t+1},
// with delta_t = r_t + gamma*V_{t+1} - V_t. values must have H+1 entries;
// the terminal one is conventionally zero for truncated episodes.
inline std::vector<double> gae_advantages(const Trajectory& traj,
                                          std::span<const double> values,
                                          double gamma, double lambda) {
  const int h = traj.length();
  if (h == 0) throw ValidationError("gae_advantages on an empty trajectory");
  if (static_cast<int>(values.size()) != h + 1)
    throw ValidationError("value_estimates has length " +
                          std::to_string(values.size()) + ", expected H+1 = " +
                          std::to_string(h + 1));
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ValidationError("gamma must lie in [0, 1), got " +
                          std::to_string(gamma));
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ValidationError("lambda must lie in [0, 1], got " +
                          std::to_string(lambda));
  std::vector<double> adv(h);
  double acc = 0.0;
  for (int t = h - 1; t >= 0; --t) {
    const double delta =
        traj.transitions[t].reward + gamma * values[t + 1] - values[t];
    acc = delta + gamma * lambda * acc;
    adv[t] = acc;
  }
  return adv;
}

namespace internal {

// Features for the linear value baseline: 1, obs, obs^2, t/H.
inline std::vector<double> value_features(std::span<const double> obs, int t,
                                          int horizon) {
  std::vector<double> x;
  x.reserve(2 * obs.size() + 2);
  x.push_back(1.0);
  for (double o : obs) x.push_back(o);
  for (double o : obs) x.push_back(o * o);
  x.push_back(static_cast<double>(t) / static_cast<double>(horizon));
  return x;
}

// Solves (A + ridge*I) w = b in place by Gaussian elimination with partial
// pivoting. A is n x n row-major.
inline std::vector<double> solve_ridge(std::vector<double> a,
                                       std::vector<double> b, int n,
                                       double ridge) {
  for (int i = 0; i < n; ++i) a[i * n + i] += ridge;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double diag = a[col * n + col];
    if (diag == 0.0) continue;  // ridge makes this unreachable in practice
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / diag;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> w(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int c = i + 1; c < n; ++c) acc -= a[i * n + c] * w[c];
    w[i] = a[i * n + i] != 0.0 ? acc / a[i * n + i] : 0.0;
  }
  return w;
}

}  // namespace internal

// Least-squares fit (tiny ridge for conditioning) of discounted
// reward-to-go on the value features, pooled over the batch.
inline std::vector<double> fit_value_baseline(
    const std::vector<Trajectory>& batch, double gamma) {
  if (batch.empty())
    throw UsageError("fit_value_baseline called with an empty batch");
  const int obs_dim = static_cast<int>(batch.front().transitions.at(0).obs.size());
  const int n = 2 * obs_dim + 2;
  std::vector<double> xtx(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> xty(n, 0.0);
  for (const auto& traj : batch) {
    const int h = traj.length();
    // Reward-to-go, computed backward.
    std::vector<double> togo(h);
    double acc = 0.0;
    for (int t = h - 1; t >= 0; --t) {
      acc = traj.transitions[t].reward + gamma * acc;
      togo[t] = acc;
    }
    for (int t = 0; t < h; ++t) {
      const auto x = internal::value_features(traj.transitions[t].obs, t, h);
      for (int i = 0; i < n; ++i) {
        xty[i] += x[i] * togo[t];
        for (int j = 0; j < n; ++j) xtx[i * n + j] += x[i] * x[j];
      }
    }
  }
  return internal::solve_ridge(std::move(xtx), std::move(xty), n, 1e-6);
}

// Predicted values for every step plus a zero terminal entry (length H+1).
inline std::vector<double> baseline_values(std::span<const double> coeffs,
                                           const Trajectory& traj) {
  const int h = traj.length();
  std::vector<double> v(h + 1, 0.0);
  for (int t = 0; t < h; ++t) {
    const auto x = internal::value_features(traj.transitions[t].obs, t, h);
    if (coeffs.size() != x.size())
      throw ValidationError("baseline has " + std::to_string(coeffs.size()) +
                            " coefficients, features need " +
                            std::to_string(x.size()));
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += coeffs[i] * x[i];
    v[t] = acc;
  }
  return v;
}

// (A - mean) / (std + 1e-8), population std, applied per pooled batch.
inline std::vector<double> normalize_advantages(std::span<const double> adv) {
  if (adv.empty())
    throw UsageError("normalize_advantages called with an empty batch");
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  var /= static_cast<double>(adv.size());
  const double denom = std::sqrt(var) + 1e-8;
  std::vector<double> out(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) out[i] = (adv[i] - mean) / denom;
  return out;
}

}  // namespace rolah
