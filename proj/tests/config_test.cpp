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

#include <filesystem>
#include <fstream>
#include <string>

#include "gtest/gtest.h"
#include "rolah/config.hpp"
#include "rolah/rundir.hpp"
#include "test_util.hpp"

namespace rolah {
namespace {

TEST(Config, DefaultsAndTrainView) {
  const RunConfig rc;
  EXPECT_EQ(rc.seed, 42u);
  EXPECT_EQ(rc.checkpoint_every, 50);
  EXPECT_EQ(rc.threads, 1);
  EXPECT_EQ(rc.theory.family, "both");
  EXPECT_EQ(rc.eval.grid.mass_coeffs.size(), 5u);

  RunConfig custom;
  custom.seed = 999;
  custom.train.iterations = 3;
  const TrainConfig tc = to_train_config(custom);
  EXPECT_EQ(tc.seed, 999u);  // [run] seed wins over the trainer default
  EXPECT_EQ(tc.iterations, 3);
}

TEST(Config, ParsesSectionsCommentsAndWhitespace) {
  const std::string text =
      "# a comment\n"
      "[run]\n"
      "seed = 7\n"
      "  checkpoint_every=2  \n"
      "; another comment\n"
      "\n"
      "[train]\n"
      "T = 11\n"
      "algorithm = rap\n"
      "hidden = 8, 16\n"
      "[env]\n"
      "horizon = 16\n";
  const RunConfig rc = parse_run_config(text, "test");
  EXPECT_EQ(rc.seed, 7u);
  EXPECT_EQ(rc.checkpoint_every, 2);
  EXPECT_EQ(rc.train.iterations, 11);
  EXPECT_EQ(rc.train.algorithm, Algorithm::kRap);
  EXPECT_EQ(rc.train.hidden, (std::vector<int>{8, 16}));
  EXPECT_EQ(rc.train.env.horizon, 16);
  EXPECT_EQ(rc.threads, 1);  // untouched keys keep their defaults
}

TEST(Config, StrictParseRejectsBeforeApplying) {
  // The unknown key on line 4 must abort the parse before seed=7 lands.
  const std::string text =
      "[run]\n"
      "seed = 7\n"
      "\n"
      "bogus = 1\n";
  RunConfig base;
  base.seed = 1;
  try {
    parse_run_config(text, "cfg.ini", base);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cfg.ini:4"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
  }
  EXPECT_EQ(base.seed, 1u);

  EXPECT_THROW(parse_run_config("[nope]\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("seed = 1\n", "t"), ConfigError);       // no section
  EXPECT_THROW(parse_run_config("[run]\nseed\n", "t"), ConfigError);    // no '='
  EXPECT_THROW(parse_run_config("[run\nseed = 1\n", "t"), ConfigError); // malformed header
  EXPECT_THROW(parse_run_config("[run]\nseed = x\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[run]\nseed = -3\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[run]\nthreads = -1\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[run]\ncheckpoint_every = 0\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[train]\nearly_stop = maybe\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[train]\nalgorithm = sgd\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[env]\nenv_id = lunar-lander\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[theory]\nfamily = cubic\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[theory]\ntrials = -1\n", "t"), ConfigError);
  EXPECT_THROW(parse_run_config("[eval]\nseeds = 1,,2\n", "t"), ConfigError);
}

TEST(Config, OverridesQualifiedBareAndAmbiguous) {
  RunConfig rc;
  apply_override(rc, "train.T=25");
  EXPECT_EQ(rc.train.iterations, 25);
  apply_override(rc, "T=30");  // unique bare key
  EXPECT_EQ(rc.train.iterations, 30);
  apply_override(rc, "noise_std = 0.5");
  EXPECT_DOUBLE_EQ(rc.eval.noise_std, 0.5);
  apply_override(rc, "theory.seed=11");
  EXPECT_EQ(rc.theory.seed, 11u);
  EXPECT_EQ(rc.seed, 42u);  // run seed untouched by the qualified form

  // "seed" lives in [run] and [theory]: bare use must list both.
  try {
    apply_override(rc, "seed=5");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("ambiguous"), std::string::npos) << msg;
    EXPECT_NE(msg.find("run.seed"), std::string::npos) << msg;
    EXPECT_NE(msg.find("theory.seed"), std::string::npos) << msg;
  }
  EXPECT_THROW(apply_override(rc, "no_equals"), ConfigError);
  EXPECT_THROW(apply_override(rc, "run.bogus=1"), ConfigError);
  EXPECT_THROW(apply_override(rc, "bogus=1"), ConfigError);
  EXPECT_THROW(apply_override(rc, "train.T=abc"), ConfigError);
}

TEST(Config, SerializationRoundTripsByteForByte) {
  RunConfig rc;
  rc.seed = 123;
  rc.run_dir = "/tmp/x";
  rc.train.iterations = 77;
  rc.train.hidden = {4, 4, 4};
  rc.train.gamma = 0.99;
  rc.eval.grid.seeds = {9, 10};
  rc.theory.epsilon_scales = {0.25};
  rc.theory.family = "quadratic-bowls";
  const std::string text = serialize_run_config(rc);
  const RunConfig back = parse_run_config(text, "resolved");
  EXPECT_EQ(serialize_run_config(back), text);
  EXPECT_EQ(back.seed, 123u);
  EXPECT_EQ(back.run_dir, "/tmp/x");
  EXPECT_EQ(back.train.hidden, rc.train.hidden);
  EXPECT_EQ(back.eval.grid.seeds, rc.eval.grid.seeds);
  EXPECT_EQ(back.theory.family, "quadratic-bowls");
  // Canonical shape: every section header exactly once, registry order.
  EXPECT_LT(text.find("[run]"), text.find("[env]"));
  EXPECT_LT(text.find("[env]"), text.find("[train]"));
  EXPECT_LT(text.find("[train]"), text.find("[eval]"));
  EXPECT_LT(text.find("[eval]"), text.find("[theory]"));
}

TEST(Config, LoadFromFileAndMissingFile) {
  testutil::ScratchDir dir;
  const std::filesystem::path path = dir.path() / "run.ini";
  std::ofstream(path) << "[run]\nseed = 5\n[train]\nm = 6\nk = 2\n";
  const RunConfig rc = load_run_config(path.string());
  EXPECT_EQ(rc.seed, 5u);
  EXPECT_EQ(rc.train.m, 6);
  EXPECT_EQ(rc.train.k, 2);
  EXPECT_THROW(load_run_config((dir.path() / "absent.ini").string()), ConfigError);
}

TEST(RunDirLayout, PathsAndCreateLayout) {
  testutil::ScratchDir scratch;
  RunDir dir{scratch.path() / "run"};
  EXPECT_EQ(dir.config_path().filename(), "config.resolved");
  EXPECT_EQ(dir.log_path().filename(), "train.log.jsonl");
  EXPECT_EQ(dir.agent_ckpt(12).filename(), "agent_12.txt");
  EXPECT_EQ(dir.adv_ckpt(3, 7).filename(), "adv3_7.txt");
  EXPECT_EQ(dir.herd_manifest(7).filename(), "herd_7.txt");
  dir.create_layout();
  EXPECT_TRUE(std::filesystem::is_directory(dir.ckpt_dir()));
  EXPECT_TRUE(std::filesystem::is_directory(dir.eval_dir()));
  dir.create_layout();  // idempotent
}

TEST(RunDirLayout, LockIsExclusiveAndReleased) {
  testutil::ScratchDir scratch;
  RunDir dir{scratch.path() / "run"};
  dir.create_layout();
  {
    RunLock lock(dir);
    EXPECT_TRUE(std::filesystem::exists(dir.lock_path()));
    try {
      RunLock second(dir);
      FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("locked"), std::string::npos);
    }
  }
  EXPECT_FALSE(std::filesystem::exists(dir.lock_path()));
  RunLock again(dir);  // re-lockable after release
}

TEST(RunDirLayout, CheckpointSetRoundTrip) {
  testutil::ScratchDir scratch;
  RunDir dir{scratch.path() / "run"};
  dir.create_layout();

  const PolicyParams agent = init_policy(MlpShapes{{2, 4, 1}}, 1);
  HerdState herd;
  herd.m = 2;
  herd.k = 1;
  herd.adversaries = {init_policy(MlpShapes{{2, 3, 1}}, 2),
                      init_policy(MlpShapes{{2, 3, 1}}, 3)};
  write_checkpoint_set(dir, 5, agent, herd);

  EXPECT_TRUE(std::filesystem::exists(dir.agent_ckpt(5)));
  EXPECT_TRUE(std::filesystem::exists(dir.adv_ckpt(0, 5)));
  EXPECT_TRUE(std::filesystem::exists(dir.adv_ckpt(1, 5)));
  const PolicyParams agent_back = load_policy(dir.agent_ckpt(5));
  EXPECT_EQ(agent_back.theta, agent.theta);
  EXPECT_EQ(agent_back.log_std, agent.log_std);

  const HerdState herd_back = load_herd(dir, 5);
  EXPECT_EQ(herd_back.m, 2);
  EXPECT_EQ(herd_back.k, 1);
  ASSERT_EQ(herd_back.adversaries.size(), 2u);
  for (int i = 0; i < 2; ++i)
    EXPECT_EQ(herd_back.adversaries[i].theta, herd.adversaries[i].theta);

  // Baseline shape: no adversaries, no manifest.
  HerdState empty;
  write_checkpoint_set(dir, 6, agent, empty);
  EXPECT_TRUE(std::filesystem::exists(dir.agent_ckpt(6)));
  EXPECT_FALSE(std::filesystem::exists(dir.herd_manifest(6)));
}

TEST(RunDirLayout, LoadHerdValidatesManifest) {
  testutil::ScratchDir scratch;
  RunDir dir{scratch.path() / "run"};
  dir.create_layout();
  EXPECT_THROW(load_herd(dir, 3), ConfigError);  // missing manifest

  std::ofstream(dir.herd_manifest(4)) << "not-a-manifest\nm 1 k 1\nadv0_4.txt\n";
  EXPECT_THROW(load_herd(dir, 4), ConfigError);

  std::ofstream(dir.herd_manifest(5)) << std::string(kHerdManifestMagic) +
                                             "\nm 2 k 1\nadv0_5.txt\n";
  EXPECT_THROW(load_herd(dir, 5), ConfigError);  // count mismatch
}

TEST(RunDirLayout, LatestCheckpointIterScansAgentFiles) {
  testutil::ScratchDir scratch;
  RunDir dir{scratch.path() / "run"};
  EXPECT_EQ(latest_checkpoint_iter(dir), -1);  // no layout yet
  dir.create_layout();
  EXPECT_EQ(latest_checkpoint_iter(dir), -1);
  const PolicyParams agent = init_policy(MlpShapes{{2, 4, 1}}, 1);
  const HerdState empty;
  write_checkpoint_set(dir, 0, agent, empty);
  write_checkpoint_set(dir, 50, agent, empty);
  write_checkpoint_set(dir, 100, agent, empty);
  std::ofstream(dir.ckpt_dir() / "agent_junk.txt") << "x";  // ignored
  std::ofstream(dir.ckpt_dir() / "notes.txt") << "x";       // ignored
  EXPECT_EQ(latest_checkpoint_iter(dir), 100);
}

}  // namespace
}  // namespace rolah
