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
// Versioned text checkpoints:
//
//   rolah-ckpt v1
//   shapes d0 d1 ... dn
//   <theta values, whitespace separated>
//   <log_std values>
//
// Values are printed with 17 significant digits and parsed with strtod, so
// a save/load cycle reproduces every double bit for bit.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rolah/errors.hpp"
#include "rolah/policy.hpp"
#include "rolah/textio.hpp"

namespace rolah {

inline constexpr const char* kCheckpointMagic = "rolah-ckpt v1";

inline void save_policy(const PolicyParams& p, std::ostream& out) {
  validate(p);
  out << kCheckpointMagic << "\n";
  out << "shapes";
  for (int d : p.shapes.dims) out << ' ' << d;
  out << "\n";
  for (std::size_t i = 0; i < p.theta.size(); ++i) {
    out << internal::format_g17(p.theta[i]);
    out << (((i + 1) % 8 == 0 || i + 1 == p.theta.size()) ? '\n' : ' ');
  }
  for (std::size_t j = 0; j < p.log_std.size(); ++j) {
    out << internal::format_g17(p.log_std[j]);
    out << (j + 1 == p.log_std.size() ? '\n' : ' ');
  }
}

inline void save_policy(const PolicyParams& p,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot open checkpoint for writing: " + path.string());
  save_policy(p, out);
  out.flush();
  if (!out)
    throw ConfigError("failed writing checkpoint: " + path.string());
}

inline PolicyParams load_policy(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic)
    throw ConfigError(name + ": bad header, expected \"" +
                      std::string(kCheckpointMagic) + "\", got \"" + line +
                      "\"");
  if (!std::getline(in, line))
    throw ConfigError(name + ": missing shapes line");
  std::istringstream shapes_line(line);
  std::string tag;
  shapes_line >> tag;
  if (tag != "shapes")
    throw ConfigError(name + ": expected shapes line, got \"" + line + "\"");
  PolicyParams p;
  int d;
  while (shapes_line >> d) p.shapes.dims.push_back(d);
  validate(p.shapes);

  const std::size_t n_theta = p.shapes.theta_size();
  const std::size_t n_sigma = static_cast<std::size_t>(p.shapes.output());
  p.theta.reserve(n_theta);
  p.log_std.reserve(n_sigma);
  std::string token;
  for (std::size_t i = 0; i < n_theta + n_sigma; ++i) {
    if (!(in >> token))
      throw ConfigError(name + ": truncated, expected " +
                        std::to_string(n_theta + n_sigma) + " values, got " +
                        std::to_string(i));
    const double v = internal::parse_double(token, name);
    if (i < n_theta)
      p.theta.push_back(v);
    else
      p.log_std.push_back(v);
  }
  if (in >> token)
    throw ConfigError(name + ": trailing data \"" + token + "\" after " +
                      std::to_string(n_theta + n_sigma) + " values");
  return p;
}

inline PolicyParams load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint: " + path.string());
  return load_policy(in, path.string());
}

}  // namespace rolah
