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
// Two-player continuous-control toys. The protagonist picks an action, a
// bounded antagonist adds a disturbance force on the same channels, and
// dynamics integrate with semi-implicit Euler at a fixed horizon (no early
// termination). Physical coefficients (mass_coeff, friction_coeff) scale
// the nominal constants so robustness can be probed on a grid.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rolah/errors.hpp"
#include "rolah/rng.hpp"

namespace rolah {

inline constexpr double kNominalMass = 1.0;
inline constexpr double kNominalFriction = 1.0;
inline constexpr double kPendulumGravity = 9.81;
inline constexpr double kPendulumLength = 1.0;
inline constexpr double kPendulumFriction = 0.1;
inline constexpr double kPendulumMaxTorque = 2.0;

struct EnvParams {
  double mass_coeff = 1.0;      // multiplies the nominal mass / inertia
  double friction_coeff = 1.0;  // multiplies the nominal friction
  double adversary_scale = 0.5; // antagonist force bound per channel
  double dt = 0.05;
  int horizon = 64;
};

inline void validate(const EnvParams& p) {
  if (!(p.mass_coeff > 0.0))
    throw ValidationError("mass_coeff must be positive, got " +
                          std::to_string(p.mass_coeff));
  if (!(p.friction_coeff >= 0.0))
    throw ValidationError("friction_coeff must be non-negative, got " +
                          std::to_string(p.friction_coeff));
  if (!(p.adversary_scale >= 0.0))
    throw ValidationError("adversary_scale must be non-negative, got " +
                          std::to_string(p.adversary_scale));
  if (!(p.dt > 0.0))
    throw ValidationError("dt must be positive, got " + std::to_string(p.dt));
  if (p.horizon < 1)
    throw ValidationError("horizon must be at least 1, got " +
                          std::to_string(p.horizon));
}

struct Interval {
  double lo;
  double hi;
};

struct ActionSpec {
  int obs_dim;
  std::vector<Interval> agent_bounds;
  std::vector<Interval> adversary_bounds;
  int agent_dim() const { return static_cast<int>(agent_bounds.size()); }
  int adversary_dim() const {
    return static_cast<int>(adversary_bounds.size());
  }
};

// `state` is the integrator state; `observation` is what policies see. They
// coincide for the point masses; the pendulum observes (cos, sin, rate).
struct EnvState {
  std::vector<double> state;
  std::vector<double> observation;
  int step_index = 0;
  bool terminated = false;
};

namespace internal {

enum class EnvKind { kPointMass1d, kPointMass2d, kPendulum };

inline EnvKind env_kind(const std::string& env_id) {
  if (env_id == "point-mass-1d") return EnvKind::kPointMass1d;
  if (env_id == "point-mass-2d") return EnvKind::kPointMass2d;
  if (env_id == "pendulum-swingup") return EnvKind::kPendulum;
  throw ConfigError("unknown env id \"" + env_id +
                    "\"; known ids: point-mass-1d, point-mass-2d, "
                    "pendulum-swingup");
}

inline double clip(double x, double lo, double hi) {
  return std::min(std::max(x, lo), hi);
}

// Maps any angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a <= 0.0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace internal

inline std::vector<std::string> env_ids() {
  return {"point-mass-1d", "point-mass-2d", "pendulum-swingup"};
}

inline ActionSpec action_spec(const std::string& env_id, const EnvParams& p) {
  validate(p);
  const double a = p.adversary_scale;
  switch (internal::env_kind(env_id)) {
    case internal::EnvKind::kPointMass1d:
      return {2, {{-1.0, 1.0}}, {{-a, a}}};
    case internal::EnvKind::kPointMass2d:
      return {4, {{-1.0, 1.0}, {-1.0, 1.0}}, {{-a, a}, {-a, a}}};
    case internal::EnvKind::kPendulum:
      return {3,
              {{-kPendulumMaxTorque, kPendulumMaxTorque}},
              {{-a, a}}};
  }
  throw ConfigError("unknown env id \"" + env_id + "\"");
}

inline EnvState reset(const std::string& env_id, const EnvParams& p,
                      std::uint64_t seed) {
  validate(p);
  Rng rng(seed);
  EnvState s;
  switch (internal::env_kind(env_id)) {
    case internal::EnvKind::kPointMass1d: {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      const double x = sign * rng.uniform(0.5, 1.5);
      const double v = rng.uniform(-0.1, 0.1);
      s.state = {x, v};
      s.observation = s.state;
      break;
    }
    case internal::EnvKind::kPointMass2d: {
      const double x = rng.uniform(-1.2, 1.2);
      const double y = rng.uniform(-1.2, 1.2);
      const double vx = rng.uniform(-0.1, 0.1);
      const double vy = rng.uniform(-0.1, 0.1);
      s.state = {x, y, vx, vy};
      s.observation = s.state;
      break;
    }
    case internal::EnvKind::kPendulum: {
      const double theta =
          internal::wrap_angle(std::numbers::pi + rng.uniform(-0.5, 0.5));
      const double theta_dot = rng.uniform(-0.5, 0.5);
      s.state = {theta, theta_dot};
      s.observation = {std::cos(theta), std::sin(theta), theta_dot};
      break;
    }
  }
  return s;
}

// One transition. Actions are clipped to their declared bounds before use;
// control penalties are charged on the clipped protagonist action.
inline std::pair<EnvState, double> step(const std::string& env_id,
                                        const EnvState& s,
                                        std::span<const double> a_p,
                                        std::span<const double> a_a,
                                        const EnvParams& p) {
  validate(p);
  if (s.terminated)
    throw UsageError("step called on a terminated episode (env " + env_id +
                     ")");
  const ActionSpec spec = action_spec(env_id, p);
  if (static_cast<int>(a_p.size()) != spec.agent_dim())
    throw ValidationError("agent action has dimension " +
                          std::to_string(a_p.size()) + ", expected " +
                          std::to_string(spec.agent_dim()) + " for " + env_id);
  if (static_cast<int>(a_a.size()) != spec.adversary_dim())
    throw ValidationError("adversary action has dimension " +
                          std::to_string(a_a.size()) + ", expected " +
                          std::to_string(spec.adversary_dim()) + " for " +
                          env_id);

  const double mass = p.mass_coeff * kNominalMass;
  EnvState out;
  double reward = 0.0;
  switch (internal::env_kind(env_id)) {
    case internal::EnvKind::kPointMass1d: {
      const double ap = internal::clip(a_p[0], -1.0, 1.0);
      const double aa =
          internal::clip(a_a[0], -p.adversary_scale, p.adversary_scale);
      const double friction = p.friction_coeff * kNominalFriction;
      const double v =
          s.state[1] + p.dt * ((ap + aa) - friction * s.state[1]) / mass;
      const double x = s.state[0] + p.dt * v;
      out.state = {x, v};
      out.observation = out.state;
      reward = -(x * x) - 0.1 * ap * ap;
      break;
    }
    case internal::EnvKind::kPointMass2d: {
      const double friction = p.friction_coeff * kNominalFriction;
      out.state.resize(4);
      double pos_sq = 0.0, ctrl_sq = 0.0;
      for (int d = 0; d < 2; ++d) {
        const double ap = internal::clip(a_p[d], -1.0, 1.0);
        const double aa =
            internal::clip(a_a[d], -p.adversary_scale, p.adversary_scale);
        const double v = s.state[2 + d] +
                         p.dt * ((ap + aa) - friction * s.state[2 + d]) / mass;
        const double x = s.state[d] + p.dt * v;
        out.state[d] = x;
        out.state[2 + d] = v;
        pos_sq += x * x;
        ctrl_sq += ap * ap;
      }
      out.observation = out.state;
      reward = -pos_sq - 0.1 * ctrl_sq;
      break;
    }
    case internal::EnvKind::kPendulum: {
      const double ap =
          internal::clip(a_p[0], -kPendulumMaxTorque, kPendulumMaxTorque);
      const double aa =
          internal::clip(a_a[0], -p.adversary_scale, p.adversary_scale);
      const double friction = p.friction_coeff * kPendulumFriction;
      const double theta = s.state[0];
      const double theta_dot = s.state[1];
      const double inertia = mass * kPendulumLength * kPendulumLength;
      // theta measured from upright, so gravity destabilizes the top.
      const double accel =
          (kPendulumGravity / kPendulumLength) * std::sin(theta) +
          ((ap + aa) - friction * theta_dot) / inertia;
      const double new_dot = theta_dot + p.dt * accel;
      const double new_theta = internal::wrap_angle(theta + p.dt * new_dot);
      out.state = {new_theta, new_dot};
      out.observation = {std::cos(new_theta), std::sin(new_theta), new_dot};
      reward = -(new_theta * new_theta) - 0.1 * new_dot * new_dot -
               0.001 * ap * ap;
      break;
    }
  }
  out.step_index = s.step_index + 1;
  out.terminated = out.step_index >= p.horizon;
  return {std::move(out), reward};
}

}  // namespace rolah
