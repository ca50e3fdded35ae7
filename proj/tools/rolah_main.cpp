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
// Command-line driver: `train`, `eval`, `cross-validate`, `verify-theory`.
// Global flags: --config, --set, --seed, --run-dir, --threads.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rolah/config.hpp"
#include "rolah/eval.hpp"
#include "rolah/rundir.hpp"
#include "rolah/theory.hpp"
#include "rolah/trainers.hpp"

namespace rolah {
namespace {

PolicyParams load_agent_checkpoint(const RunDir& dir, const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_policy(std::filesystem::path(explicit_path));
  const int iter = latest_checkpoint_iter(dir);
  if (iter < 0)
    throw ConfigError("no agent checkpoint found under \"" + dir.ckpt_dir().string() +
                      "\"; train first or pass --checkpoint");
  return load_policy(dir.agent_ckpt(iter));
}

// Adversaries for disturbance/cross evaluation: explicit paths win,
// otherwise the latest herd manifest of the run.
std::vector<PolicyParams> load_adversaries(const RunDir& dir,
                                           const std::vector<std::string>& paths) {
  std::vector<PolicyParams> out;
  if (!paths.empty()) {
    for (const std::string& p : paths)
      out.push_back(load_policy(std::filesystem::path(p)));
    return out;
  }
  const int iter = latest_checkpoint_iter(dir);
  if (iter >= 0 && std::filesystem::exists(dir.herd_manifest(iter)))
    out = load_herd(dir, iter).adversaries;
  return out;
}

int cmd_train(const RunConfig& rc) {
  const TrainConfig tc = to_train_config(rc);
  validate(tc);
  if (rc.run_dir.empty())
    throw ConfigError("train needs a run directory (--run-dir or [run] run_dir)");
  RunDir dir{rc.run_dir};
  dir.create_layout();
  RunLock lock(dir);
  set_threads(rc.threads);

  {
    std::ofstream out(dir.config_path(), std::ios::binary);
    if (!out)
      throw ConfigError("cannot write \"" + dir.config_path().string() + "\"");
    out << serialize_run_config(rc);
    if (!out)
      throw ConfigError("failed while writing \"" + dir.config_path().string() + "\"");
  }

  std::printf("train %s on %s: T=%d m=%d k=%d seed=%llu threads=%d\n",
              to_string(tc.algorithm), tc.env_id.c_str(), tc.iterations, tc.m, tc.k,
              static_cast<unsigned long long>(tc.seed), threads());

  // Iteration-0 state (identical to the trainer's own initialization).
  TrainConfig init_cfg = tc;
  init_cfg.iterations = 0;
  const TrainResult init_state = train(init_cfg);
  write_checkpoint_set(dir, 0, init_state.agent, init_state.herd);

  std::ofstream log(dir.log_path(), std::ios::binary);
  if (!log) throw ConfigError("cannot write \"" + dir.log_path().string() + "\"");
  int last_checkpoint = 0;
  const IterationObserver observer = [&](const IterationSnapshot& snap) {
    log << serialize_record(snap.record) << "\n";
    log.flush();
    const int done = snap.record.iteration + 1;
    if (done % rc.checkpoint_every == 0) {
      write_checkpoint_set(dir, done, *snap.agent, *snap.herd);
      last_checkpoint = done;
      std::printf("checkpoint %d -> %s\n", done, dir.agent_ckpt(done).string().c_str());
    }
  };
  const TrainResult result = train(tc, observer);
  const int completed = static_cast<int>(result.log.records.size());
  if (completed != last_checkpoint)
    write_checkpoint_set(dir, completed, result.agent, result.herd);
  if (completed > 0)
    std::printf("done: %d iterations, final objective %.6f\n", completed,
                result.log.records.back().agent_objective);
  else
    std::printf("done: 0 iterations, initial checkpoint written\n");
  std::printf("log: %s\n", dir.log_path().string().c_str());
  return 0;
}

int cmd_eval(const RunConfig& rc, const std::string& mode,
             const std::string& checkpoint_path,
             const std::vector<std::string>& extra_agent_paths,
             const std::vector<std::string>& adversary_paths) {
  if (rc.run_dir.empty())
    throw ConfigError("eval needs a run directory (--run-dir or [run] run_dir)");
  RunDir dir{rc.run_dir};
  if (!std::filesystem::exists(dir.root))
    throw ConfigError("run directory \"" + dir.root.string() + "\" does not exist");
  std::filesystem::create_directories(dir.eval_dir());
  RunLock lock(dir);
  set_threads(rc.threads);

  const PolicyParams agent = load_agent_checkpoint(dir, checkpoint_path);
  const double gamma = rc.train.gamma;
  const std::string& env_id = rc.train.env_id;
  const EnvParams& env = rc.train.env;

  if (mode == "grid") {
    const GridResult result = eval_grid(agent, env_id, env, rc.eval.grid, gamma);
    const std::filesystem::path path = dir.eval_dir() / "grid.csv";
    write_grid_csv(path.string(), result);
    std::printf("wrote %s (%zu rows, R_lo=%.6f R_hi=%.6f)\n", path.string().c_str(),
                result.rows.size(), result.refs.r_lo, result.refs.r_hi);
    return 0;
  }

  if (mode == "disturbance") {
    const std::vector<PolicyParams> adversaries = load_adversaries(dir, adversary_paths);
    std::string csv = "suite,seed,mean_return\n";
    const ReturnEstimate none = eval_disturbance(
        agent, DisturbanceSuite::none(), env_id, env, rc.eval.episodes, gamma, rc.seed);
    csv += "none," + std::to_string(rc.seed) + "," +
           internal::format_g17(none.mean_return) + "\n";
    std::printf("none: %.6f\n", none.mean_return);
    const ReturnEstimate noisy = eval_disturbance(
        agent, DisturbanceSuite::action_noise(rc.eval.noise_std), env_id, env,
        rc.eval.episodes, gamma, rc.seed);
    csv += "action_noise," + std::to_string(rc.seed) + "," +
           internal::format_g17(noisy.mean_return) + "\n";
    std::printf("action_noise(std=%g): %.6f\n", rc.eval.noise_std, noisy.mean_return);
    if (!adversaries.empty()) {
      // The worst adversary of the set: lowest mean return against this agent.
      std::size_t worst = 0;
      double worst_mean = 0.0;
      for (std::size_t i = 0; i < adversaries.size(); ++i) {
        const double mean =
            estimate_R(agent, adversaries[i], env_id, env, rc.eval.episodes, gamma, rc.seed)
                .mean_return;
        if (i == 0 || mean < worst_mean) {
          worst = i;
          worst_mean = mean;
        }
      }
      csv += "worst_adversary," + std::to_string(rc.seed) + "," +
             internal::format_g17(worst_mean) + "\n";
      std::printf("worst_adversary (#%zu of %zu): %.6f\n", worst, adversaries.size(),
                  worst_mean);
    } else {
      std::printf("worst_adversary: skipped (no herd checkpoints, no --adversary)\n");
    }
    const std::filesystem::path path = dir.eval_dir() / "disturbance.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write \"" + path.string() + "\"");
    out << csv;
    std::printf("wrote %s\n", path.string().c_str());
    return 0;
  }

  if (mode == "cross") {
    std::vector<PolicyParams> agents = {agent};
    for (const std::string& p : extra_agent_paths)
      agents.push_back(load_policy(std::filesystem::path(p)));
    const std::vector<PolicyParams> adversaries = load_adversaries(dir, adversary_paths);
    if (adversaries.empty())
      throw ConfigError(
          "cross-validation needs adversaries: pass --adversary or use a run with herd "
          "checkpoints");
    const auto matrix = cross_validate(agents, adversaries, env_id, env,
                                       rc.eval.episodes, gamma, rc.seed);
    const std::filesystem::path path = dir.eval_dir() / "cross.csv";
    write_cross_csv(path.string(), matrix, rc.seed);
    std::printf("wrote %s (%zu x %zu)\n", path.string().c_str(), agents.size(),
                adversaries.size());
    return 0;
  }

  throw ConfigError("unknown eval mode \"" + mode + "\"; known: grid, disturbance, cross");
}

// Desk-scale theorem verification. Prints one PASS/FAIL/SKIPPED line per
// check with the parameters used; exit 0 iff nothing failed.
int cmd_verify_theory(const TheoryConfig& t) {
  for (double s : t.epsilon_scales)
    if (!(s > 0.0))
      throw ValidationError("epsilon scale must be positive, got " +
                            internal::format_g17(s));
  if (!(t.delta > 0.0 && t.delta < 1.0))
    throw ValidationError("delta must lie in (0, 1), got " +
                          internal::format_g17(t.delta));

  bool any_fail = false;
  const auto emit = [&](bool ok, const std::string& text) {
    if (!ok) any_fail = true;
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", text.c_str());
  };
  const auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
  };
  std::string scales_text;
  for (double s : t.epsilon_scales) {
    if (!scales_text.empty()) scales_text += ",";
    scales_text += fmt(s);
  }

  // Maximal packing => cover => bounded inner-min gap, over random classes.
  std::vector<std::string> families;
  if (t.family == "both")
    families = {"lipschitz-bumps", "quadratic-bowls"};
  else
    families = {t.family};
  for (const std::string& family : families) {
    const bool random_family = family == "lipschitz-bumps";
    const int class_count = random_family ? t.classes : 1;
    int violations = 0;
    int packings = 0;
    for (int ci = 0; ci < class_count; ++ci) {
      const SyntheticClass c =
          random_family
              ? build_synthetic_class(family, 80, 30, 2.5, split_seed(t.seed, ci))
              : build_synthetic_class(family, 201, 101, 7.0, 0);
      for (double scale : t.epsilon_scales) {
        const double eps = scale * c.r_max;
        if (!(eps > 0.0)) {
          ++violations;
          continue;
        }
        const PackingResult p = greedy_maximal_packing(c, eps);
        ++packings;
        if (!(p.is_packing && p.is_cover && p.is_maximal)) ++violations;
        for (int theta = 0; theta < c.n_theta(); ++theta)
          if (inner_min_gap(c, p.selected, theta) > eps) ++violations;
      }
    }
    emit(violations == 0, "theorem1/" + family + " classes=" +
                              std::to_string(class_count) + " scales=" + scales_text +
                              " packings=" + std::to_string(packings) +
                              " violations=" + std::to_string(violations));
  }

  // Packing cardinality along the radius-realizing 1-D family.
  if (t.family != "lipschitz-bumps") {
    const SyntheticClass quad = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 0);
    const PackingResult p = greedy_maximal_packing(quad, 3.0);
    emit(static_cast<int>(p.selected.size()) >= 4,
         "theorem1/count r_max=" + fmt(quad.r_max) +
             " eps=3 selected=" + std::to_string(p.selected.size()) + " (need >= 4)");
  }

  // Closed-form sample bound, pinned value plus loop-oracle agreement.
  {
    const int m = theorem2_sample_bound(0.05, 1.0, 1.0, 10.0);
    bool loop_ok = true;
    for (double delta : {0.3, 0.05, 0.01})
      for (double x : {0.02, 0.1, 0.37}) {
        int k = 1;
        double acc = 1.0 - x;
        while (acc > delta) {
          acc *= 1.0 - x;
          ++k;
        }
        if (k != theorem2_sample_bound(delta, x, 1.0, 1.0)) loop_ok = false;
      }
    emit(m == 29 && loop_ok,
         "theorem2/bound delta=0.05 ratio=0.1 m=" + std::to_string(m) +
             " (need 29) loop_oracle=" + (loop_ok ? "ok" : "mismatch"));
  }

  // Monte-Carlo side of the bound on the quadratic family.
  if (t.trials == 0) {
    std::printf("SKIPPED theorem2/empirical trials=0\n");
  } else {
    const SyntheticClass quad = build_synthetic_class("quadratic-bowls", 201, 101, 7.0, 0);
    const std::vector<double> uniform(static_cast<std::size_t>(quad.n_phi()), 1.0);
    const int mid = quad.n_theta() / 2;
    double l_hat = 0.0;
    for (int i = 0; i < quad.n_phi(); ++i)
      for (int j = i + 1; j < quad.n_phi(); ++j) {
        const double gap = std::abs(quad.phi_points[i][0] - quad.phi_points[j][0]);
        if (gap > 0.0)
          l_hat = std::max(l_hat, std::abs(quad.R[mid][i] - quad.R[mid][j]) / gap);
      }
    const double l_sigma = 0.25;
    const double eps = 0.1 * l_hat / l_sigma;
    const double threshold = 1.0 - t.delta - 0.03;
    try {
      const int m = theorem2_sample_bound(t.delta, eps, l_sigma, l_hat);
      const double rate = theorem2_empirical_check(quad, uniform, l_sigma, t.delta, eps,
                                                   t.trials, t.seed);
      emit(rate >= threshold,
           "theorem2/empirical m=" + std::to_string(m) + " trials=" +
               std::to_string(t.trials) + " rate=" + fmt(rate) + " (need >= " +
               fmt(threshold) + ")");
    } catch (const ValidationError& e) {
      emit(false, std::string("theorem2/empirical premise: ") + e.what());
    }
  }

  // Solution-set equivalence: exhaustive small grid, randomized large grid.
  {
    const SyntheticClass small =
        build_synthetic_class("lipschitz-bumps", 12, 10, 2.0, split_seed(t.seed, 101));
    bool ok = true;
    for (int m = 1; m <= 5; ++m)
      for (int theta = 0; theta < small.n_theta(); ++theta)
        if (!lemma1_check(small, m, theta)) ok = false;
    emit(ok, "lemma1/exhaustive |phi|=12 m<=5 thetas=10");

    const SyntheticClass big =
        build_synthetic_class("lipschitz-bumps", 200, 12, 2.0, split_seed(t.seed, 102));
    const bool big_ok = lemma1_check(big, 3, big.n_theta() / 2);
    emit(big_ok, "lemma1/randomized |phi|=200 m=3 subsets=1000+witness");
  }

  return any_fail ? 1 : 0;
}

}  // namespace
}  // namespace rolah

int main(int argc, char** argv) {
  CLI::App app{"adversarial-herd robust reinforcement learning toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  unsigned long long seed_flag = 0;
  std::string run_dir_flag;
  int threads_flag = 0;
  app.add_option("--config", config_path, "configuration file");
  app.add_option("--set", overrides, "override `key=value` or `section.key=value`");
  auto* seed_opt = app.add_option("--seed", seed_flag, "master seed");
  auto* run_dir_opt = app.add_option("--run-dir", run_dir_flag, "run directory");
  auto* threads_opt =
      app.add_option("--threads", threads_flag, "worker threads (0 = auto)");

  auto* train_cmd =
      app.add_subcommand("train", "train a policy against an adversarial herd");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained checkpoint");
  std::string mode = "grid";
  std::string checkpoint_path;
  std::vector<std::string> agent_paths;
  std::vector<std::string> adversary_paths;
  eval_cmd->add_option("--mode", mode, "grid | disturbance | cross")
      ->check(CLI::IsMember({"grid", "disturbance", "cross"}));
  eval_cmd->add_option("--checkpoint", checkpoint_path,
                       "agent checkpoint (default: latest in the run directory)");
  eval_cmd->add_option("--agent", agent_paths, "additional agent checkpoints (cross)");
  eval_cmd->add_option("--adversary", adversary_paths,
                       "adversary checkpoints (default: latest herd manifest)");

  auto* cross_cmd =
      app.add_subcommand("cross-validate", "agents x adversaries return matrix");
  cross_cmd->add_option("--checkpoint", checkpoint_path,
                        "agent checkpoint (default: latest in the run directory)");
  cross_cmd->add_option("--agent", agent_paths, "additional agent checkpoints");
  cross_cmd->add_option("--adversary", adversary_paths,
                        "adversary checkpoints (default: latest herd manifest)");

  auto* theory_cmd =
      app.add_subcommand("verify-theory", "run the desk-scale theorem checks");
  std::string family_flag;
  double epsilon_flag = 0.0;
  double delta_flag = 0.0;
  int trials_flag = 0;
  int classes_flag = 0;
  auto* family_opt = theory_cmd->add_option(
      "--family", family_flag, "both | lipschitz-bumps | quadratic-bowls");
  auto* epsilon_opt = theory_cmd->add_option(
      "--epsilon", epsilon_flag, "single packing scale (fraction of r_max)");
  auto* delta_opt = theory_cmd->add_option("--delta", delta_flag, "failure probability");
  auto* trials_opt =
      theory_cmd->add_option("--trials", trials_flag, "Monte-Carlo trials (0 = skip)");
  auto* classes_opt =
      theory_cmd->add_option("--classes", classes_flag, "random classes per family");

  for (CLI::App* sub : {train_cmd, eval_cmd, cross_cmd, theory_cmd})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    rolah::RunConfig rc;
    if (!config_path.empty()) rc = rolah::load_run_config(config_path);
    for (const std::string& s : overrides) rolah::apply_override(rc, s);
    if (seed_opt->count()) {
      rc.seed = seed_flag;
      rc.theory.seed = seed_flag;
    }
    if (run_dir_opt->count()) rc.run_dir = run_dir_flag;
    if (threads_opt->count()) rc.threads = threads_flag;
    if (family_opt->count())
      rolah::apply_override(rc, "theory.family=" + family_flag);
    if (epsilon_opt->count()) rc.theory.epsilon_scales = {epsilon_flag};
    if (delta_opt->count())
      rolah::apply_override(rc, "theory.delta=" + rolah::internal::format_g17(delta_flag));
    if (trials_opt->count())
      rolah::apply_override(rc, "theory.trials=" + std::to_string(trials_flag));
    if (classes_opt->count())
      rolah::apply_override(rc, "theory.classes=" + std::to_string(classes_flag));

    if (*train_cmd) return rolah::cmd_train(rc);
    if (*eval_cmd)
      return rolah::cmd_eval(rc, mode, checkpoint_path, agent_paths, adversary_paths);
    if (*cross_cmd)
      return rolah::cmd_eval(rc, "cross", checkpoint_path, agent_paths, adversary_paths);
    if (*theory_cmd) {
      rolah::set_threads(rc.threads);
      return rolah::cmd_verify_theory(rc.theory);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "rolah: %s\n", e.what());
    return 2;
  }
  return 0;
}
