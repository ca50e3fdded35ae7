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
// Diagonal-Gaussian MLP policies over flat parameter vectors, with exact
// reverse-mode gradients of the action log-density and a clipped-ratio
// policy-gradient update. Everything is plain double arithmetic on
// std::vector so results are reproducible bit for bit.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rolah/errors.hpp"
#include "rolah/rng.hpp"

namespace rolah {

// Layer widths, input first. dims = {4, 32, 32, 2} is a two-hidden-layer
// net from 4 observations to 2 action means. Hidden activations are tanh,
// the output layer is linear.
struct MlpShapes {
  std::vector<int> dims;

  int input() const { return dims.front(); }
  int output() const { return dims.back(); }
  int layers() const { return static_cast<int>(dims.size()) - 1; }

  std::size_t theta_size() const {
    std::size_t n = 0;
    for (int l = 0; l < layers(); ++l)
      n += static_cast<std::size_t>(dims[l + 1]) * (dims[l] + 1);
    return n;
  }

  bool operator==(const MlpShapes&) const = default;
};

inline void validate(const MlpShapes& s) {
  if (s.dims.size() < 2)
    throw ValidationError("MlpShapes needs at least input and output dims, got " +
                          std::to_string(s.dims.size()));
  for (int d : s.dims)
    if (d < 1)
      throw ValidationError("MlpShapes dims must be positive, got " +
                            std::to_string(d));
}

// theta holds, per layer, the weight matrix row-major (out x in) followed by
// the bias; log_std is one state-independent entry per action dimension.
struct PolicyParams {
  MlpShapes shapes;
  std::vector<double> theta;
  std::vector<double> log_std;

  std::size_t param_count() const { return theta.size() + log_std.size(); }
};

inline void validate(const PolicyParams& p) {
  validate(p.shapes);
  if (p.theta.size() != p.shapes.theta_size())
    throw ValidationError("theta has " + std::to_string(p.theta.size()) +
                          " entries, shapes imply " +
                          std::to_string(p.shapes.theta_size()));
  if (static_cast<int>(p.log_std.size()) != p.shapes.output())
    throw ValidationError("log_std has " + std::to_string(p.log_std.size()) +
                          " entries, expected " +
                          std::to_string(p.shapes.output()));
}

namespace internal {

struct LayerView {
  std::size_t w_offset;
  std::size_t b_offset;
  int in;
  int out;
};

inline LayerView layer_view(const MlpShapes& s, int layer) {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l)
    off += static_cast<std::size_t>(s.dims[l + 1]) * (s.dims[l] + 1);
  const int in = s.dims[layer];
  const int out = s.dims[layer + 1];
  return {off, off + static_cast<std::size_t>(out) * in, in, out};
}

// Activations per layer, input included; hidden entries are post-tanh, the
// last entry is the linear output (the Gaussian mean).
inline std::vector<std::vector<double>> forward(const PolicyParams& p,
                                                std::span<const double> obs) {
  std::vector<std::vector<double>> acts;
  acts.reserve(p.shapes.dims.size());
  acts.emplace_back(obs.begin(), obs.end());
  for (int l = 0; l < p.shapes.layers(); ++l) {
    const LayerView v = layer_view(p.shapes, l);
    std::vector<double> z(v.out);
    for (int o = 0; o < v.out; ++o) {
      double acc = p.theta[v.b_offset + o];
      const std::size_t row = v.w_offset + static_cast<std::size_t>(o) * v.in;
      for (int i = 0; i < v.in; ++i) acc += p.theta[row + i] * acts.back()[i];
      z[o] = (l + 1 < p.shapes.layers()) ? std::tanh(acc) : acc;
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

// Backpropagates d(scalar)/d(mean) through the cached activations into a
// theta-shaped gradient accumulator.
inline void backprop_mean(const PolicyParams& p,
                          const std::vector<std::vector<double>>& acts,
                          std::vector<double> delta,
                          std::vector<double>& grad_theta) {
  for (int l = p.shapes.layers() - 1; l >= 0; --l) {
    const LayerView v = layer_view(p.shapes, l);
    const std::vector<double>& in_act = acts[l];
    for (int o = 0; o < v.out; ++o) {
      const std::size_t row = v.w_offset + static_cast<std::size_t>(o) * v.in;
      for (int i = 0; i < v.in; ++i) grad_theta[row + i] += delta[o] * in_act[i];
      grad_theta[v.b_offset + o] += delta[o];
    }
    if (l == 0) break;
    std::vector<double> prev(v.in, 0.0);
    for (int i = 0; i < v.in; ++i) {
      double acc = 0.0;
      for (int o = 0; o < v.out; ++o) {
        const std::size_t row = v.w_offset + static_cast<std::size_t>(o) * v.in;
        acc += p.theta[row + i] * delta[o];
      }
      prev[i] = acc * (1.0 - in_act[i] * in_act[i]);  // tanh'
    }
    delta = std::move(prev);
  }
}

inline void check_obs(const PolicyParams& p, std::span<const double> obs) {
  if (static_cast<int>(obs.size()) != p.shapes.input())
    throw ValidationError("observation has dimension " +
                          std::to_string(obs.size()) + ", policy expects " +
                          std::to_string(p.shapes.input()));
}

inline void check_action(const PolicyParams& p, std::span<const double> a) {
  if (static_cast<int>(a.size()) != p.shapes.output())
    throw ValidationError("action has dimension " + std::to_string(a.size()) +
                          ", policy expects " +
                          std::to_string(p.shapes.output()));
}

}  // namespace internal

// Glorot-uniform weights, zero biases, initial action stddev 0.5.
inline PolicyParams init_policy(const MlpShapes& shapes, std::uint64_t seed) {
  validate(shapes);
  PolicyParams p;
  p.shapes = shapes;
  p.theta.assign(shapes.theta_size(), 0.0);
  p.log_std.assign(shapes.output(), std::log(0.5));
  Rng rng(seed);
  for (int l = 0; l < shapes.layers(); ++l) {
    const internal::LayerView v = internal::layer_view(shapes, l);
    const double limit = std::sqrt(6.0 / (v.in + v.out));
    for (int o = 0; o < v.out; ++o) {
      const std::size_t row = v.w_offset + static_cast<std::size_t>(o) * v.in;
      for (int i = 0; i < v.in; ++i)
        p.theta[row + i] = rng.uniform(-limit, limit);
    }
  }
  return p;
}

inline std::vector<double> mlp_mean(const PolicyParams& p,
                                    std::span<const double> obs) {
  internal::check_obs(p, obs);
  return internal::forward(p, obs).back();
}

inline double log_prob(const PolicyParams& p, std::span<const double> obs,
                       std::span<const double> action) {
  internal::check_obs(p, obs);
  internal::check_action(p, action);
  const std::vector<double> mean = internal::forward(p, obs).back();
  double lp = 0.0;
  for (int j = 0; j < p.shapes.output(); ++j) {
    const double sigma = std::exp(p.log_std[j]);
    const double z = (action[j] - mean[j]) / sigma;
    lp += -0.5 * z * z - p.log_std[j] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return lp;
}

// Draws action = mean + sigma * z, one normal variate per dimension in
// index order. Returns the action and its log-density (computed from the
// same forward pass, so it agrees exactly with log_prob on the result).
inline std::pair<std::vector<double>, double> sample_action(
    const PolicyParams& p, std::span<const double> obs, Rng& rng) {
  internal::check_obs(p, obs);
  const std::vector<double> mean = internal::forward(p, obs).back();
  std::vector<double> action(p.shapes.output());
  double lp = 0.0;
  for (int j = 0; j < p.shapes.output(); ++j) {
    const double sigma = std::exp(p.log_std[j]);
    action[j] = mean[j] + sigma * rng.normal();
    const double z = (action[j] - mean[j]) / sigma;
    lp += -0.5 * z * z - p.log_std[j] - 0.5 * std::log(2.0 * std::numbers::pi);
  }
  return {action, lp};
}

// d log pi(a|s) / d (theta, log_std), concatenated in that order.
inline std::vector<double> log_prob_grad(const PolicyParams& p,
                                         std::span<const double> obs,
                                         std::span<const double> action) {
  internal::check_obs(p, obs);
  internal::check_action(p, action);
  const auto acts = internal::forward(p, obs);
  const std::vector<double>& mean = acts.back();
  std::vector<double> grad(p.param_count(), 0.0);
  std::vector<double> dmean(p.shapes.output());
  for (int j = 0; j < p.shapes.output(); ++j) {
    const double sigma = std::exp(p.log_std[j]);
    const double diff = action[j] - mean[j];
    dmean[j] = diff / (sigma * sigma);
    grad[p.theta.size() + j] = (diff * diff) / (sigma * sigma) - 1.0;
  }
  std::vector<double> grad_theta(p.theta.size(), 0.0);
  internal::backprop_mean(p, acts, std::move(dmean), grad_theta);
  for (std::size_t i = 0; i < grad_theta.size(); ++i) grad[i] = grad_theta[i];
  return grad;
}

// One (s, a, log-density under the behavior policy, advantage estimate).
struct SurrogateSample {
  std::vector<double> obs;
  std::vector<double> action;
  double behavior_log_prob = 0.0;
  double advantage = 0.0;
};

// Clipped-ratio policy update. Per epoch, takes one full-batch gradient
// step of size step_size on
//   mean_i min(rho_i * A_i, clip(rho_i, 1 - clip, 1 + clip) * A_i),
// with rho_i the density ratio against the behavior policy. maximize=false
// performs the same ascent on negated advantages, which is what the
// antagonist wants. Samples whose ratio has left the trust region
// contribute zero gradient, so a batch entirely out of region is a no-op.
inline PolicyParams clipped_surrogate_update(
    const PolicyParams& params, const std::vector<SurrogateSample>& batch,
    double step_size, double clip, bool maximize, int epochs = 4) {
  validate(params);
  if (batch.empty())
    throw UsageError("clipped_surrogate_update called with an empty batch");
  if (!(step_size > 0.0))
    throw ValidationError("step_size must be positive, got " +
                          std::to_string(step_size));
  if (!(clip > 0.0 && clip < 1.0))
    throw ValidationError("clip must lie in (0, 1), got " +
                          std::to_string(clip));
  if (epochs < 1)
    throw ValidationError("epochs must be at least 1, got " +
                          std::to_string(epochs));
  for (const auto& s : batch) {
    internal::check_obs(params, s.obs);
    internal::check_action(params, s.action);
  }

  PolicyParams p = params;
  const double n = static_cast<double>(batch.size());
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::vector<double> grad(p.param_count(), 0.0);
    for (const auto& s : batch) {
      const double adv = maximize ? s.advantage : -s.advantage;
      const double lp = log_prob(p, s.obs, s.action);
      const double ratio = std::exp(lp - s.behavior_log_prob);
      const bool clipped = (adv >= 0.0 && ratio > 1.0 + clip) ||
                           (adv < 0.0 && ratio < 1.0 - clip);
      if (clipped) continue;
      const std::vector<double> g = log_prob_grad(p, s.obs, s.action);
      const double scale = adv * ratio;
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += scale * g[i];
    }
    for (std::size_t i = 0; i < p.theta.size(); ++i)
      p.theta[i] += step_size * grad[i] / n;
    for (std::size_t j = 0; j < p.log_std.size(); ++j)
      p.log_std[j] += step_size * grad[p.theta.size() + j] / n;
  }
  return p;
}

// Value of the clipped surrogate objective itself, for diagnostics/tests.
inline double clipped_surrogate_objective(const PolicyParams& p,
                                          const std::vector<SurrogateSample>& batch,
                                          double clip, bool maximize) {
  if (batch.empty())
    throw UsageError("clipped_surrogate_objective on an empty batch");
  double total = 0.0;
  for (const auto& s : batch) {
    const double adv = maximize ? s.advantage : -s.advantage;
    const double ratio = std::exp(log_prob(p, s.obs, s.action) - s.behavior_log_prob);
    const double clipped =
        std::min(std::max(ratio, 1.0 - clip), 1.0 + clip) * adv;
    total += std::min(ratio * adv, clipped);
  }
  return total / static_cast<double>(batch.size());
}

// theta followed by log_std, handy for change detection and distances.
inline std::vector<double> flatten(const PolicyParams& p) {
  std::vector<double> flat = p.theta;
  flat.insert(flat.end(), p.log_std.begin(), p.log_std.end());
  return flat;
}

}  // namespace rolah
