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
// Run-directory layout and artifact persistence:
//   <run_dir>/config.resolved        canonical configuration snapshot
//   <run_dir>/train.log.jsonl        one record per iteration
//   <run_dir>/ckpt/agent_<iter>.txt  agent policy checkpoints
//   <run_dir>/ckpt/adv<i>_<iter>.txt adversary policy checkpoints
//   <run_dir>/ckpt/herd_<iter>.txt   herd index manifest (m, k, file list)
//   <run_dir>/eval/*.csv             evaluation reports
// A run directory is owned by one process at a time via a `.lock` file.

#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rolah/checkpoint.hpp"
#include "rolah/errors.hpp"
#include "rolah/herd.hpp"

namespace rolah {

inline constexpr char kHerdManifestMagic[] = "rolah-herd v1";

struct RunDir {
  std::filesystem::path root;

  explicit RunDir(std::filesystem::path r) : root(std::move(r)) {}

  std::filesystem::path config_path() const { return root / "config.resolved"; }
  std::filesystem::path log_path() const { return root / "train.log.jsonl"; }
  std::filesystem::path ckpt_dir() const { return root / "ckpt"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path lock_path() const { return root / ".lock"; }

  std::string agent_ckpt_name(int iter) const {
    return "agent_" + std::to_string(iter) + ".txt";
  }
  std::string adv_ckpt_name(int index, int iter) const {
    return "adv" + std::to_string(index) + "_" + std::to_string(iter) + ".txt";
  }
  std::string herd_manifest_name(int iter) const {
    return "herd_" + std::to_string(iter) + ".txt";
  }

  std::filesystem::path agent_ckpt(int iter) const {
    return ckpt_dir() / agent_ckpt_name(iter);
  }
  std::filesystem::path adv_ckpt(int index, int iter) const {
    return ckpt_dir() / adv_ckpt_name(index, iter);
  }
  std::filesystem::path herd_manifest(int iter) const {
    return ckpt_dir() / herd_manifest_name(iter);
  }

  void create_layout() const {
    std::filesystem::create_directories(ckpt_dir());
    std::filesystem::create_directories(eval_dir());
  }
};

// Exclusive-create lock; removed on destruction. Holding the lock marks the
// directory as owned by this process.
class RunLock {
 public:
  explicit RunLock(const RunDir& dir) : path_(dir.lock_path()) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw ConfigError("run directory already locked: \"" + path_.string() +
                        "\" exists (remove it if no other process owns the run)");
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

// Agent checkpoint plus, for a nonempty herd, one checkpoint per adversary
// and an index manifest naming them.
inline void write_checkpoint_set(const RunDir& dir, int iter,
                                 const PolicyParams& agent, const HerdState& herd) {
  save_policy(agent, dir.agent_ckpt(iter));
  if (herd.m == 0) return;
  std::ostringstream manifest;
  manifest << kHerdManifestMagic << "\n";
  manifest << "m " << herd.m << " k " << herd.k << "\n";
  for (int i = 0; i < herd.m; ++i) {
    save_policy(herd.adversaries[i], dir.adv_ckpt(i, iter));
    manifest << dir.adv_ckpt_name(i, iter) << "\n";
  }
  const std::filesystem::path path = dir.herd_manifest(iter);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open \"" + path.string() + "\" for writing");
  out << manifest.str();
  if (!out) throw ConfigError("failed while writing \"" + path.string() + "\"");
}

inline HerdState load_herd(const RunDir& dir, int iter) {
  const std::filesystem::path path = dir.herd_manifest(iter);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read herd manifest \"" + path.string() + "\"");
  std::string magic;
  std::getline(in, magic);
  if (magic != kHerdManifestMagic)
    throw ConfigError("\"" + path.string() + "\": bad header, expected \"" +
                      kHerdManifestMagic + "\"");
  std::string tag_m, tag_k;
  HerdState herd;
  if (!(in >> tag_m >> herd.m >> tag_k >> herd.k) || tag_m != "m" || tag_k != "k" ||
      herd.m < 1 || herd.k < 1)
    throw ConfigError("\"" + path.string() + "\": malformed m/k line");
  std::string name;
  while (in >> name) {
    herd.adversaries.push_back(load_policy(dir.ckpt_dir() / name));
  }
  if (static_cast<int>(herd.adversaries.size()) != herd.m)
    throw ConfigError("\"" + path.string() + "\": manifest lists " +
                      std::to_string(herd.adversaries.size()) + " files for m=" +
                      std::to_string(herd.m));
  return herd;
}

// Highest <iter> among ckpt/agent_<iter>.txt files, or -1 when none exist.
inline int latest_checkpoint_iter(const RunDir& dir) {
  int best = -1;
  std::error_code ec;
  std::filesystem::directory_iterator it(dir.ckpt_dir(), ec);
  if (ec) return best;
  for (const auto& entry : it) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("agent_", 0) != 0 || name.size() <= 10) continue;
    if (name.substr(name.size() - 4) != ".txt") continue;
    const std::string digits = name.substr(6, name.size() - 10);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos)
      continue;
    best = std::max(best, std::stoi(digits));
  }
  return best;
}

}  // namespace rolah
