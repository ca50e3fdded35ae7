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
// The adversarial-herd training loop and its ablations. One iteration of
// the full algorithm:
//   (a) estimate the agent's return against every herd member,
//   (b) pick the worst k (or all, for the *-all variants) and update each
//       picked adversary by descent on the agent's advantages,
//   (c) re-estimate all m returns against the updated herd,
//   (d) re-pick the worst k, collect b_p fresh episodes against each, pool
//       the k*b_p episodes, and update the agent by ascent.
// baseline skips (a)-(c) and trains against a zero disturbance; rarl is
// the m=k=1 case; rap is k=m with every adversary updated.
//
// Seed tree (all from config.seed): agent init split(seed,0); herd init
// split(seed,1); iteration t derives it=split(split(seed,2),t) and phases
// use split(it,0..3), with per-adversary streams split off those. The
// standalone worst-adversary trainer uses split(seed,3) for its init and
// split(seed,4) for its iterations, so it never collides with train().

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rolah/env.hpp"
#include "rolah/errors.hpp"
#include "rolah/herd.hpp"
#include "rolah/policy.hpp"
#include "rolah/rollout.hpp"
#include "rolah/textio.hpp"

namespace rolah {

enum class Algorithm { kBaseline, kRarl, kRap, kRolahWorst, kRolahAll };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBaseline: return "baseline";
    case Algorithm::kRarl: return "rarl";
    case Algorithm::kRap: return "rap";
    case Algorithm::kRolahWorst: return "rolah_worst";
    case Algorithm::kRolahAll: return "rolah_all";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "baseline") return Algorithm::kBaseline;
  if (s == "rarl") return Algorithm::kRarl;
  if (s == "rap") return Algorithm::kRap;
  if (s == "rolah_worst") return Algorithm::kRolahWorst;
  if (s == "rolah_all") return Algorithm::kRolahAll;
  throw ConfigError("unknown algorithm \"" + s +
                    "\"; expected one of baseline, rarl, rap, rolah_worst, "
                    "rolah_all");
}

struct TrainConfig {
  Algorithm algorithm = Algorithm::kRolahWorst;
  int m = 10;
  int k = 3;
  double lambda_p = 3e-3;  // agent step size
  double lambda_a = 3e-3;  // adversary step size
  double gamma = 0.995;
  double gae_lambda = 0.97;
  double clip = 0.2;
  int iterations = 200;  // the T cap
  int b_a = 8;           // episodes per selected adversary, adversary phase
  int b_p = 8;           // episodes per selected adversary, agent phase
  int selection_episodes = 8;
  int update_epochs = 4;
  bool early_stop = true;
  std::vector<int> hidden = {32, 32};
  std::uint64_t seed = 42;
  std::string env_id = "point-mass-1d";
  EnvParams env;
};

inline void validate(const TrainConfig& c) {
  validate(c.env);
  action_spec(c.env_id, c.env);  // rejects unknown env ids
  switch (c.algorithm) {
    case Algorithm::kBaseline:
      if (c.m != 0)
        throw ValidationError("baseline trains without adversaries: m must "
                              "be 0, got m=" + std::to_string(c.m));
      break;
    case Algorithm::kRarl:
      if (c.m != 1 || c.k != 1)
        throw ValidationError("rarl uses a single adversary: need m=1 and "
                              "k=1, got m=" + std::to_string(c.m) +
                              ", k=" + std::to_string(c.k));
      break;
    case Algorithm::kRap:
      if (c.m < 1 || c.k != c.m)
        throw ValidationError("rap averages over the whole herd: need k=m "
                              "with m >= 1, got m=" + std::to_string(c.m) +
                              ", k=" + std::to_string(c.k));
      break;
    case Algorithm::kRolahWorst:
    case Algorithm::kRolahAll:
      if (c.m < 1 || c.k < 1 || c.k > c.m)
        throw ValidationError("herd selection needs 1 <= k <= m, got m=" +
                              std::to_string(c.m) +
                              ", k=" + std::to_string(c.k));
      break;
  }
  if (!(c.lambda_p > 0.0))
    throw ValidationError("lambda_p must be positive, got " +
                          std::to_string(c.lambda_p));
  if (!(c.lambda_a > 0.0))
    throw ValidationError("lambda_a must be positive, got " +
                          std::to_string(c.lambda_a));
  if (!(c.gamma >= 0.0 && c.gamma < 1.0))
    throw ValidationError("gamma must lie in [0, 1), got " +
                          std::to_string(c.gamma));
  if (!(c.gae_lambda >= 0.0 && c.gae_lambda <= 1.0))
    throw ValidationError("gae_lambda must lie in [0, 1], got " +
                          std::to_string(c.gae_lambda));
  if (!(c.clip > 0.0 && c.clip < 1.0))
    throw ValidationError("clip must lie in (0, 1), got " +
                          std::to_string(c.clip));
  if (c.iterations < 0)
    throw ValidationError("T must be non-negative, got " +
                          std::to_string(c.iterations));
  if (c.b_a < 1 || c.b_p < 1 || c.selection_episodes < 1)
    throw ValidationError("b_a, b_p and selection_episodes must be at least "
                          "1, got " + std::to_string(c.b_a) + ", " +
                          std::to_string(c.b_p) + ", " +
                          std::to_string(c.selection_episodes));
  if (c.update_epochs < 1)
    throw ValidationError("update_epochs must be at least 1, got " +
                          std::to_string(c.update_epochs));
  for (int h : c.hidden)
    if (h < 1)
      throw ValidationError("hidden layer widths must be positive, got " +
                            std::to_string(h));
}

// One completed iteration. wall_clock_s and the phase sequence counters
// stay in memory only: the serialized log must be byte-identical across
// reruns of the same config, and timing is not.
struct TrainRecord {
  int iteration = 0;
  std::vector<double> est_pre;   // R against each adversary before phase (b)
  std::vector<double> est_post;  // after phase (b)
  std::vector<int> adv_updated;  // adversaries stepped in phase (b)
  std::vector<int> worst_k;      // selection backing the agent update
  double agent_objective = 0.0;  // worst-k average (baseline: batch mean)
  double wall_clock_s = 0.0;
  std::uint64_t adv_phase_seq = 0;    // 0 when there was no adversary phase
  std::uint64_t agent_phase_seq = 0;  // strictly after adv_phase_seq
};

struct TrainLog {
  std::vector<TrainRecord> records;
};

// One JSON object per line. Schema:
//   {"iter":int,"est_pre":[...],"adv_updated":[...],
//    "est_post":[...],"worst_k":[...],"agent_obj":num}
inline std::string serialize_record(const TrainRecord& r) {
  std::ostringstream out;
  const auto reals = [&out](const std::vector<double>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i)
      out << (i ? "," : "") << internal::format_g17(v[i]);
    out << ']';
  };
  const auto ints = [&out](const std::vector<int>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << ']';
  };
  out << "{\"iter\":" << r.iteration << ",\"est_pre\":";
  reals(r.est_pre);
  out << ",\"adv_updated\":";
  ints(r.adv_updated);
  out << ",\"est_post\":";
  reals(r.est_post);
  out << ",\"worst_k\":";
  ints(r.worst_k);
  out << ",\"agent_obj\":" << internal::format_g17(r.agent_objective) << "}";
  return out.str();
}

inline std::string serialize_log(const TrainLog& log) {
  std::string out;
  for (const auto& r : log.records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

// Per-iteration view for tests and instrumentation: flattened adversary
// parameter vectors on both sides of the adversary phase, plus non-owning
// views of the live post-update state (valid only during the callback).
struct IterationSnapshot {
  TrainRecord record;
  std::vector<std::vector<double>> herd_before;
  std::vector<std::vector<double>> herd_after;
  const PolicyParams* agent = nullptr;
  const HerdState* herd = nullptr;
};
using IterationObserver = std::function<void(const IterationSnapshot&)>;

struct TrainResult {
  PolicyParams agent;
  HerdState herd;  // m = 0 for baseline
  TrainLog log;
};

namespace internal {

// Advantage samples for the protagonist over a pooled batch: value baseline
// fit on the pool, GAE per trajectory, normalization across the pool.
inline std::vector<SurrogateSample> agent_samples(
    const std::vector<Trajectory>& pool, double gamma, double lambda) {
  const std::vector<double> coeffs = fit_value_baseline(pool, gamma);
  std::vector<double> raw;
  std::vector<SurrogateSample> samples;
  for (const auto& traj : pool) {
    const auto values = baseline_values(coeffs, traj);
    const auto adv = gae_advantages(traj, values, gamma, lambda);
    for (int t = 0; t < traj.length(); ++t) {
      const auto& tr = traj.transitions[t];
      samples.push_back({tr.obs, tr.a_p, tr.log_prob_p, adv[t]});
      raw.push_back(adv[t]);
    }
  }
  const std::vector<double> norm = normalize_advantages(raw);
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i].advantage = norm[i];
  return samples;
}

// Same construction viewed from the antagonist: its actions and densities,
// still the agent's advantages (the caller updates with maximize=false,
// which is descent on them — the zero-sum flip).
inline std::vector<SurrogateSample> adversary_samples(
    const std::vector<Trajectory>& pool, double gamma, double lambda) {
  std::vector<SurrogateSample> samples = agent_samples(pool, gamma, lambda);
  std::size_t idx = 0;
  for (const auto& traj : pool) {
    for (const auto& tr : traj.transitions) {
      samples[idx].action = tr.a_a;
      samples[idx].behavior_log_prob = tr.log_prob_a;
      ++idx;
    }
  }
  return samples;
}

inline std::vector<std::vector<double>> flatten_herd(const HerdState& herd) {
  std::vector<std::vector<double>> flat;
  flat.reserve(herd.adversaries.size());
  for (const auto& adv : herd.adversaries) flat.push_back(flatten(adv));
  return flat;
}

inline double step_norm(const PolicyParams& before, const PolicyParams& after) {
  const auto a = flatten(before), b = flatten(after);
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sq);
}

inline MlpShapes policy_shapes(int in, const std::vector<int>& hidden,
                               int out) {
  MlpShapes s;
  s.dims.push_back(in);
  for (int h : hidden) s.dims.push_back(h);
  s.dims.push_back(out);
  return s;
}

}  // namespace internal

inline TrainResult train(const TrainConfig& cfg,
                         const IterationObserver& observer = {}) {
  validate(cfg);
  const ActionSpec spec = action_spec(cfg.env_id, cfg.env);
  const MlpShapes agent_shapes =
      internal::policy_shapes(spec.obs_dim, cfg.hidden, spec.agent_dim());
  const MlpShapes adv_shapes =
      internal::policy_shapes(spec.obs_dim, cfg.hidden, spec.adversary_dim());

  TrainResult result;
  result.agent = init_policy(agent_shapes, split_seed(cfg.seed, 0));
  if (cfg.m > 0)
    result.herd = init_herd(cfg.m, cfg.k, adv_shapes, split_seed(cfg.seed, 1));

  const bool update_all = cfg.algorithm == Algorithm::kRap ||
                          cfg.algorithm == Algorithm::kRolahAll;
  const std::uint64_t iter_base = split_seed(cfg.seed, 2);
  std::uint64_t event_seq = 0;
  int stalled = 0;

  for (int t = 0; t < cfg.iterations; ++t) {
    const auto t_start = std::chrono::steady_clock::now();
    const std::uint64_t it = split_seed(iter_base, t);
    TrainRecord rec;
    rec.iteration = t;
    std::vector<std::vector<double>> herd_before, herd_after;
    if (observer) herd_before = internal::flatten_herd(result.herd);

    const auto estimate_all = [&](std::uint64_t phase_seed) {
      std::vector<double> est(cfg.m);
      std::vector<ReturnEstimate> full(cfg.m);
      for (int i = 0; i < cfg.m; ++i) {
        full[i] = estimate_R(result.agent, result.herd.adversaries[i],
                             cfg.env_id, cfg.env, cfg.selection_episodes,
                             cfg.gamma, split_seed(phase_seed, i));
        est[i] = full[i].mean_return;
      }
      result.herd.last_estimates = std::move(full);
      return est;
    };

    PolicyParams next_agent;
    if (cfg.m > 0) {
      // (a) estimate against the current herd.
      rec.est_pre = estimate_all(split_seed(it, 0));

      // (b) update the picked adversaries by descent.
      const std::uint64_t sb = split_seed(it, 1);
      if (update_all) {
        rec.adv_updated.resize(cfg.m);
        std::iota(rec.adv_updated.begin(), rec.adv_updated.end(), 0);
      } else {
        rec.adv_updated = worst_k_indices(rec.est_pre, cfg.k).indices;
      }
      for (int j : rec.adv_updated) {
        const auto pool =
            collect(result.agent, result.herd.adversaries[j], cfg.env_id,
                    cfg.env, cfg.b_a, split_seed(sb, j));
        const auto samples =
            internal::adversary_samples(pool, cfg.gamma, cfg.gae_lambda);
        result.herd.adversaries[j] = clipped_surrogate_update(
            result.herd.adversaries[j], samples, cfg.lambda_a, cfg.clip,
            /*maximize=*/false, cfg.update_epochs);
      }
      rec.adv_phase_seq = ++event_seq;
      if (observer) herd_after = internal::flatten_herd(result.herd);

      // (c) re-estimate against the updated herd.
      rec.est_post = estimate_all(split_seed(it, 2));

      // (d) pool fresh episodes from the re-picked worst k, update agent
      // by ascent.
      rec.worst_k = worst_k_indices(rec.est_post, cfg.k).indices;
      const std::uint64_t sd = split_seed(it, 3);
      std::vector<Trajectory> pool;
      pool.reserve(static_cast<std::size_t>(cfg.k) * cfg.b_p);
      for (int j : rec.worst_k) {
        auto batch = collect(result.agent, result.herd.adversaries[j],
                             cfg.env_id, cfg.env, cfg.b_p, split_seed(sd, j));
        for (auto& traj : batch) pool.push_back(std::move(traj));
      }
      const auto samples =
          internal::agent_samples(pool, cfg.gamma, cfg.gae_lambda);
      next_agent = clipped_surrogate_update(result.agent, samples,
                                            cfg.lambda_p, cfg.clip,
                                            /*maximize=*/true,
                                            cfg.update_epochs);
      rec.agent_objective = worst_k_objective(rec.est_post, cfg.k);
    } else {
      // baseline: agent phase only, zero disturbance.
      const std::uint64_t sd = split_seed(it, 3);
      const RolloutOptions none;
      const auto pool = collect(result.agent, none, cfg.env_id, cfg.env,
                                cfg.b_p, split_seed(sd, 0));
      const auto samples =
          internal::agent_samples(pool, cfg.gamma, cfg.gae_lambda);
      next_agent = clipped_surrogate_update(result.agent, samples,
                                            cfg.lambda_p, cfg.clip,
                                            /*maximize=*/true,
                                            cfg.update_epochs);
      double total = 0.0;
      for (const auto& traj : pool)
        total += discounted_return(rewards_of(traj), cfg.gamma);
      rec.agent_objective = total / static_cast<double>(pool.size());
      if (observer) herd_after = herd_before;
    }
    rec.agent_phase_seq = ++event_seq;

    const double moved = internal::step_norm(result.agent, next_agent);
    result.agent = std::move(next_agent);
    rec.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      t_start)
            .count();
    result.log.records.push_back(rec);
    if (observer)
      observer({result.log.records.back(), std::move(herd_before),
                std::move(herd_after), &result.agent, &result.herd});

    if (cfg.early_stop) {
      stalled = moved < 1e-6 ? stalled + 1 : 0;
      if (stalled >= 5) break;
    }
  }
  return result;
}

// Trains a fresh adversary against a frozen agent (the evaluation-time
// worst-case probe). Uses its own branches of the seed tree.
inline PolicyParams train_worst_adversary(const PolicyParams& frozen_agent,
                                          const TrainConfig& cfg) {
  validate(cfg);
  validate(frozen_agent);
  const ActionSpec spec = action_spec(cfg.env_id, cfg.env);
  const MlpShapes adv_shapes =
      internal::policy_shapes(spec.obs_dim, cfg.hidden, spec.adversary_dim());
  PolicyParams adversary = init_policy(adv_shapes, split_seed(cfg.seed, 3));
  const std::uint64_t iter_base = split_seed(cfg.seed, 4);
  for (int t = 0; t < cfg.iterations; ++t) {
    const std::uint64_t it = split_seed(iter_base, t);
    const auto pool = collect(frozen_agent, adversary, cfg.env_id, cfg.env,
                              cfg.b_a, split_seed(it, 0));
    const auto samples =
        internal::adversary_samples(pool, cfg.gamma, cfg.gae_lambda);
    adversary = clipped_surrogate_update(adversary, samples, cfg.lambda_a,
                                         cfg.clip, /*maximize=*/false,
                                         cfg.update_epochs);
  }
  return adversary;
}

}  // namespace rolah
