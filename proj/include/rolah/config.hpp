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
// Run configuration: flat `key = value` text grouped into [sections], with
// strict unknown-key rejection, `section.key=value` overrides, and a
// canonical serialization used as the resolved-config snapshot. The
// snapshot fully determines a run; parsing it back reproduces the same
// configuration byte for byte.

#pragma once

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rolah/env.hpp"
#include "rolah/errors.hpp"
#include "rolah/eval.hpp"
#include "rolah/textio.hpp"
#include "rolah/trainers.hpp"

namespace rolah {

struct TheoryConfig {
  std::string family = "both";  // both | lipschitz-bumps | quadratic-bowls
  std::vector<double> epsilon_scales = {0.05, 0.1, 0.3};  // fractions of r_max
  double delta = 0.05;
  int trials = 400;   // 0 skips the sampling-bound Monte Carlo
  int classes = 5;    // random classes per family in the packing sweep
  std::uint64_t seed = 7;
};

struct EvalConfig {
  GridSpec grid = default_grid_spec();
  int episodes = 8;        // disturbance-suite episodes
  double noise_std = 0.1;  // action-noise disturbance std
};

struct RunConfig {
  std::uint64_t seed = 42;
  std::string run_dir;
  int checkpoint_every = 50;
  int threads = 1;  // 0 = auto; never changes numerical results
  TrainConfig train;
  EvalConfig eval;
  TheoryConfig theory;
};

// The training view: [run] seed is authoritative for the trainer too.
inline TrainConfig to_train_config(const RunConfig& rc) {
  TrainConfig tc = rc.train;
  tc.seed = rc.seed;
  return tc;
}

namespace internal {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline long long parse_int(const std::string& token, const std::string& where) {
  if (token.empty()) throw ConfigError(where + ": expected an integer, got \"\"");
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(token.c_str(), &end, 10);
  if (errno != 0 || end != token.c_str() + token.size())
    throw ConfigError(where + ": expected an integer, got \"" + token + "\"");
  return v;
}

inline std::uint64_t parse_u64(const std::string& token, const std::string& where) {
  if (token.empty() || token[0] == '-')
    throw ConfigError(where + ": expected a non-negative integer, got \"" + token + "\"");
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(token.c_str(), &end, 10);
  if (errno != 0 || end != token.c_str() + token.size())
    throw ConfigError(where + ": expected a non-negative integer, got \"" + token + "\"");
  return v;
}

inline bool parse_bool(const std::string& token, const std::string& where) {
  if (token == "true" || token == "1") return true;
  if (token == "false" || token == "0") return false;
  throw ConfigError(where + ": expected true/false, got \"" + token + "\"");
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!value.empty() && value.back() == ',') out.push_back("");
  return out;
}

inline std::vector<double> parse_double_list(const std::string& value,
                                             const std::string& where) {
  std::vector<double> out;
  for (const std::string& item : split_list(value))
    out.push_back(parse_double(item, where));
  return out;
}

inline std::vector<std::uint64_t> parse_u64_list(const std::string& value,
                                                 const std::string& where) {
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_u64(item, where));
  return out;
}

inline std::vector<int> parse_int_list(const std::string& value,
                                       const std::string& where) {
  std::vector<int> out;
  for (const std::string& item : split_list(value))
    out.push_back(static_cast<int>(parse_int(item, where)));
  return out;
}

template <typename T, typename Format>
std::string join_list(const std::vector<T>& values, Format format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format(values[i]);
  }
  return out;
}

struct KeyDef {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<KeyDef>& key_defs() {
  static const std::vector<KeyDef> defs = [] {
    std::vector<KeyDef> d;
    const auto g17 = [](double v) { return format_g17(v); };
    const auto u64s = [](std::uint64_t v) { return std::to_string(v); };
    const auto ints = [](int v) { return std::to_string(v); };

    // [run]
    d.push_back({"run", "seed",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.seed = parse_u64(v, w);
                 },
                 [u64s](const RunConfig& rc) { return u64s(rc.seed); }});
    d.push_back({"run", "run_dir",
                 [](RunConfig& rc, const std::string& v, const std::string&) {
                   rc.run_dir = v;
                 },
                 [](const RunConfig& rc) { return rc.run_dir; }});
    d.push_back({"run", "checkpoint_every",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.checkpoint_every = static_cast<int>(parse_int(v, w));
                   if (rc.checkpoint_every < 1)
                     throw ConfigError(w + ": checkpoint_every must be >= 1, got " + v);
                 },
                 [ints](const RunConfig& rc) { return ints(rc.checkpoint_every); }});
    d.push_back({"run", "threads",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.threads = static_cast<int>(parse_int(v, w));
                   if (rc.threads < 0)
                     throw ConfigError(w + ": threads must be >= 0, got " + v);
                 },
                 [ints](const RunConfig& rc) { return ints(rc.threads); }});

    // [env]
    d.push_back({"env", "env_id",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   try {
                     action_spec(v, EnvParams{});
                   } catch (const ConfigError& e) {
                     throw ConfigError(w + ": " + e.what());
                   }
                   rc.train.env_id = v;
                 },
                 [](const RunConfig& rc) { return rc.train.env_id; }});
    d.push_back({"env", "mass_coeff",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.env.mass_coeff = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.env.mass_coeff); }});
    d.push_back({"env", "friction_coeff",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.env.friction_coeff = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.env.friction_coeff); }});
    d.push_back({"env", "adversary_scale",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.env.adversary_scale = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.env.adversary_scale); }});
    d.push_back({"env", "dt",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.env.dt = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.env.dt); }});
    d.push_back({"env", "horizon",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.env.horizon = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.env.horizon); }});

    // [train]
    d.push_back({"train", "algorithm",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   try {
                     rc.train.algorithm = algorithm_from_string(v);
                   } catch (const ConfigError& e) {
                     throw ConfigError(w + ": " + e.what());
                   }
                 },
                 [](const RunConfig& rc) { return to_string(rc.train.algorithm); }});
    d.push_back({"train", "m",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.m = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.m); }});
    d.push_back({"train", "k",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.k = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.k); }});
    d.push_back({"train", "lambda_p",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.lambda_p = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.lambda_p); }});
    d.push_back({"train", "lambda_a",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.lambda_a = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.lambda_a); }});
    d.push_back({"train", "gamma",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.gamma = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.gamma); }});
    d.push_back({"train", "gae_lambda",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.gae_lambda = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.gae_lambda); }});
    d.push_back({"train", "clip",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.clip = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.train.clip); }});
    d.push_back({"train", "T",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.iterations = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.iterations); }});
    d.push_back({"train", "b_a",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.b_a = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.b_a); }});
    d.push_back({"train", "b_p",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.b_p = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.b_p); }});
    d.push_back({"train", "selection_episodes",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.selection_episodes = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.selection_episodes); }});
    d.push_back({"train", "update_epochs",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.update_epochs = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.train.update_epochs); }});
    d.push_back({"train", "early_stop",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.early_stop = parse_bool(v, w);
                 },
                 [](const RunConfig& rc) {
                   return std::string(rc.train.early_stop ? "true" : "false");
                 }});
    d.push_back({"train", "hidden",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.train.hidden = parse_int_list(v, w);
                 },
                 [ints](const RunConfig& rc) {
                   return join_list(rc.train.hidden, ints);
                 }});

    // [eval]
    d.push_back({"eval", "mass_coeffs",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.eval.grid.mass_coeffs = parse_double_list(v, w);
                 },
                 [g17](const RunConfig& rc) {
                   return join_list(rc.eval.grid.mass_coeffs, g17);
                 }});
    d.push_back({"eval", "friction_coeffs",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.eval.grid.friction_coeffs = parse_double_list(v, w);
                 },
                 [g17](const RunConfig& rc) {
                   return join_list(rc.eval.grid.friction_coeffs, g17);
                 }});
    d.push_back({"eval", "seeds",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.eval.grid.seeds = parse_u64_list(v, w);
                 },
                 [u64s](const RunConfig& rc) {
                   return join_list(rc.eval.grid.seeds, u64s);
                 }});
    d.push_back({"eval", "episodes_per_cell",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.eval.grid.episodes_per_cell = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.eval.grid.episodes_per_cell); }});
    d.push_back({"eval", "episodes",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.eval.episodes = static_cast<int>(parse_int(v, w));
                 },
                 [ints](const RunConfig& rc) { return ints(rc.eval.episodes); }});
    d.push_back({"eval", "noise_std",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.eval.noise_std = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.eval.noise_std); }});

    // [theory]
    d.push_back({"theory", "family",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   if (v != "both" && v != "lipschitz-bumps" && v != "quadratic-bowls")
                     throw ConfigError(w + ": unknown family \"" + v +
                                       "\"; known: both, lipschitz-bumps, quadratic-bowls");
                   rc.theory.family = v;
                 },
                 [](const RunConfig& rc) { return rc.theory.family; }});
    d.push_back({"theory", "epsilon_scales",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.theory.epsilon_scales = parse_double_list(v, w);
                 },
                 [g17](const RunConfig& rc) {
                   return join_list(rc.theory.epsilon_scales, g17);
                 }});
    d.push_back({"theory", "delta",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.theory.delta = parse_double(v, w);
                 },
                 [g17](const RunConfig& rc) { return g17(rc.theory.delta); }});
    d.push_back({"theory", "trials",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.theory.trials = static_cast<int>(parse_int(v, w));
                   if (rc.theory.trials < 0)
                     throw ConfigError(w + ": trials must be >= 0, got " + v);
                 },
                 [ints](const RunConfig& rc) { return ints(rc.theory.trials); }});
    d.push_back({"theory", "classes",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.theory.classes = static_cast<int>(parse_int(v, w));
                   if (rc.theory.classes < 1)
                     throw ConfigError(w + ": classes must be >= 1, got " + v);
                 },
                 [ints](const RunConfig& rc) { return ints(rc.theory.classes); }});
    d.push_back({"theory", "seed",
                 [](RunConfig& rc, const std::string& v, const std::string& w) {
                   rc.theory.seed = parse_u64(v, w);
                 },
                 [u64s](const RunConfig& rc) { return u64s(rc.theory.seed); }});
    return d;
  }();
  return defs;
}

inline const KeyDef* find_key(const std::string& section, const std::string& key) {
  for (const KeyDef& def : key_defs())
    if (section == def.section && key == def.key) return &def;
  return nullptr;
}

}  // namespace internal

// Parses `[section]` / `key = value` text on top of the given base config.
// Full-line comments start with '#' or ';'. Unknown sections or keys are
// rejected, with <name>:<line> diagnostics, before any value is applied.
inline RunConfig parse_run_config(const std::string& text, const std::string& name,
                                  RunConfig base = RunConfig{}) {
  struct Entry {
    const internal::KeyDef* def;
    std::string value;
    std::string where;
  };
  std::vector<Entry> entries;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = name + ":" + std::to_string(line_no);
    const std::string line = internal::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError(where + ": malformed section header \"" + line + "\"");
      section = internal::trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& def : internal::key_defs())
        if (section == def.section) known = true;
      if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected `key = value`, got \"" + line + "\"");
    const std::string key = internal::trim(line.substr(0, eq));
    const std::string value = internal::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (section.empty())
      throw ConfigError(where + ": key \"" + key + "\" outside any [section]");
    const internal::KeyDef* def = internal::find_key(section, key);
    if (def == nullptr)
      throw ConfigError(where + ": unknown key \"" + key + "\" in [" + section + "]");
    entries.push_back({def, value, where});
  }
  for (const Entry& e : entries) e.def->set(base, e.value, e.where);
  return base;
}

inline RunConfig load_run_config(const std::string& path, RunConfig base = RunConfig{}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file \"" + path + "\"");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path, std::move(base));
}

// `section.key=value` or bare `key=value` when the key names exactly one
// section.key pair.
inline void apply_override(RunConfig& rc, const std::string& spec) {
  const std::string where = "--set " + spec;
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError(where + ": expected key=value");
  std::string key = internal::trim(spec.substr(0, eq));
  const std::string value = internal::trim(spec.substr(eq + 1));
  std::string section;
  const std::size_t dot = key.find('.');
  if (dot != std::string::npos) {
    section = key.substr(0, dot);
    key = key.substr(dot + 1);
    const internal::KeyDef* def = internal::find_key(section, key);
    if (def == nullptr)
      throw ConfigError(where + ": unknown key \"" + section + "." + key + "\"");
    def->set(rc, value, where);
    return;
  }
  std::vector<const internal::KeyDef*> matches;
  for (const auto& def : internal::key_defs())
    if (key == def.key) matches.push_back(&def);
  if (matches.empty()) throw ConfigError(where + ": unknown key \"" + key + "\"");
  if (matches.size() > 1) {
    std::string candidates;
    for (const auto* def : matches) {
      if (!candidates.empty()) candidates += ", ";
      candidates += std::string(def->section) + "." + def->key;
    }
    throw ConfigError(where + ": ambiguous key \"" + key + "\" (" + candidates + ")");
  }
  matches[0]->set(rc, value, where);
}

// Canonical text: every key in registry order, grouped by section. Feeding
// the output back through parse_run_config reproduces the configuration.
inline std::string serialize_run_config(const RunConfig& rc) {
  std::string out;
  std::string section;
  for (const auto& def : internal::key_defs()) {
    if (section != def.section) {
      if (!section.empty()) out += "\n";
      section = def.section;
      out += "[" + section + "]\n";
    }
    out += std::string(def.key) + " = " + def.get(rc) + "\n";
  }
  return out;
}

}  // namespace rolah
