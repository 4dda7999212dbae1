// Copyright 2026 The spikesot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "spikesot/tensor.hpp"

namespace spikesot {

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Clip(round(u), 0, D) with ties rounded away from zero.
inline std::int32_t fire_count(double u, int d_cap) {
  const double r = std::round(u);
  if (r <= 0.0) return 0;
  if (r >= d_cap) return d_cap;
  return static_cast<std::int32_t>(r);
}

/// Parameters of one NI-LIF layer. The decay for timestep t is
/// sigmoid(theta[t]); a single entry is shared by every timestep.
struct NiLifParams {
  std::vector<double> theta{0.0};
  int d_cap = 4;

  static NiLifParams per_timestep(std::size_t timesteps, int d_cap, double theta0 = 0.0);
  static NiLifParams fixed_decay(double beta, int d_cap);

  bool shared() const { return theta.size() == 1; }
  std::size_t theta_index(std::size_t t) const;
  double beta(std::size_t t) const { return sigmoid(theta[theta_index(t)]); }
};

struct NeuronState {
  DenseTensor h;
  std::size_t t = 0;

  static NeuronState zeros(const Shape& shape) { return {DenseTensor(shape), 0}; }
};

/// One charge / fire / reset step. Returns the emitted counts and the
/// post-fire state for the next timestep.
std::pair<SpikeTensor, NeuronState> nilif_step(const DenseTensor& y,
                                               const NeuronState& state,
                                               const NiLifParams& p);

/// Folds nilif_step over the inputs from a zero state.
std::vector<SpikeTensor> nilif_sequence(const std::vector<DenseTensor>& ys,
                                        const NiLifParams& p);

/// dS/dU under the straight-through convention: 1/D on [-0.5, D + 0.5].
DenseTensor straight_through_grad(const DenseTensor& u, int d_cap);

inline double straight_through_slope(double u, int d_cap) {
  return (u >= -0.5 && u <= d_cap + 0.5) ? 1.0 / d_cap : 0.0;
}

/// Integer mode fires with round/clip. Relaxed mode replaces round/clip by
/// clamp(u, -0.5, D + 0.5), whose exact derivative equals the
/// straight-through slope; it exists for gradient verification.
enum class NeuronMode { integer, relaxed };

/// Whole-sequence evaluation over a tensor whose leading axis is time.
/// Keeps what the backward pass needs.
struct NiLifTrace {
  SpikeTensor spikes;   // integer mode only
  DenseTensor output;   // S = counts / D (or the relaxed value)
  DenseTensor charged;  // U[t]
  DenseTensor reset;    // H[t]
};

NiLifTrace nilif_forward(const DenseTensor& y, const NiLifParams& p,
                         NeuronMode mode = NeuronMode::integer);

struct NiLifGrads {
  DenseTensor input;          // dL/dY
  std::vector<double> theta;  // dL/dtheta, same length as params.theta
};

NiLifGrads nilif_backward(const DenseTensor& grad_output, const NiLifTrace& trace,
                          const NiLifParams& p);

}  // namespace spikesot
