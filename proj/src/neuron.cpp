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

#include "spikesot/neuron.hpp"

#include <algorithm>
#include <cmath>

namespace spikesot {

NiLifParams NiLifParams::per_timestep(std::size_t timesteps, int d_cap, double theta0) {
  if (timesteps == 0) throw Error("NiLifParams: need at least one timestep");
  return {std::vector<double>(timesteps, theta0), d_cap};
}

NiLifParams NiLifParams::fixed_decay(double beta, int d_cap) {
  if (!(beta >= 0.0 && beta < 1.0)) throw Error("NiLifParams: decay must lie in [0, 1)");
  // sigmoid(-1000) is exactly 0 in double precision.
  return {{beta == 0.0 ? -1000.0 : logit(beta)}, d_cap};
}

std::size_t NiLifParams::theta_index(std::size_t t) const {
  if (shared()) return 0;
  if (t >= theta.size())
    throw Error("NiLifParams: timestep " + std::to_string(t) + " beyond " +
                std::to_string(theta.size()) + " decay parameters");
  return t;
}

std::pair<SpikeTensor, NeuronState> nilif_step(const DenseTensor& y,
                                               const NeuronState& state,
                                               const NiLifParams& p) {
  require_shape("nilif_step", state.h.shape(), y.shape());
  const double beta = p.beta(state.t);
  SpikeTensor s(y.shape(), p.d_cap);
  NeuronState next{DenseTensor(y.shape()), state.t + 1};
  auto counts = s.mutable_counts();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double u = beta * state.h[i] + y[i];
    counts[i] = fire_count(u, p.d_cap);
    next.h[i] = u - counts[i];
  }
  return {std::move(s), std::move(next)};
}

std::vector<SpikeTensor> nilif_sequence(const std::vector<DenseTensor>& ys,
                                        const NiLifParams& p) {
  if (ys.empty()) throw Error("nilif_sequence: empty input sequence");
  std::vector<SpikeTensor> out;
  out.reserve(ys.size());
  NeuronState state = NeuronState::zeros(ys.front().shape());
  for (const auto& y : ys) {
    auto [s, next] = nilif_step(y, state, p);
    out.push_back(std::move(s));
    state = std::move(next);
  }
  return out;
}

DenseTensor straight_through_grad(const DenseTensor& u, int d_cap) {
  DenseTensor g(u.shape());
  for (std::size_t i = 0; i < u.size(); ++i) g[i] = straight_through_slope(u[i], d_cap);
  return g;
}

NiLifTrace nilif_forward(const DenseTensor& y, const NiLifParams& p, NeuronMode mode) {
  if (y.rank() < 1 || y.dim(0) == 0) throw Error("nilif_forward: missing time axis");
  const std::size_t steps = y.dim(0);
  const std::size_t plane = y.size() / steps;
  const double d = p.d_cap;

  NiLifTrace tr{SpikeTensor(y.shape(), p.d_cap), DenseTensor(y.shape()),
                DenseTensor(y.shape()), DenseTensor(y.shape())};
  auto counts = tr.spikes.mutable_counts();
  for (std::size_t t = 0; t < steps; ++t) {
    const double beta = p.beta(t);
    const std::size_t base = t * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t k = base + i;
      const double prev = t ? tr.reset[k - plane] : 0.0;
      const double u = beta * prev + y[k];
      tr.charged[k] = u;
      if (mode == NeuronMode::integer) {
        counts[k] = fire_count(u, p.d_cap);
        tr.output[k] = counts[k] / d;
        tr.reset[k] = u - counts[k];
      } else {
        const double c = std::clamp(u, -0.5, d + 0.5);
        tr.output[k] = c / d;
        tr.reset[k] = u - c;
      }
    }
  }
  return tr;
}

NiLifGrads nilif_backward(const DenseTensor& grad_output, const NiLifTrace& trace,
                          const NiLifParams& p) {
  require_shape("nilif_backward", trace.charged.shape(), grad_output.shape());
  const std::size_t steps = trace.charged.dim(0);
  const std::size_t plane = trace.charged.size() / steps;
  const double d = p.d_cap;

  NiLifGrads g{DenseTensor(grad_output.shape()), std::vector<double>(p.theta.size(), 0.0)};
  // dL/dH[t], carried backwards through the decay.
  std::vector<double> grad_reset(plane, 0.0);
  for (std::size_t t = steps; t-- > 0;) {
    const std::size_t base = t * plane;
    const double beta = p.beta(t);
    double theta_acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      const std::size_t k = base + i;
      const double slope = straight_through_slope(trace.charged[k], p.d_cap);
      const double gu = grad_output[k] * slope + grad_reset[i] * (1.0 - d * slope);
      g.input[k] = gu;
      if (t) {
        theta_acc += gu * trace.reset[k - plane];
        grad_reset[i] = gu * beta;
      }
    }
    if (t) g.theta[p.theta_index(t)] += theta_acc * beta * (1.0 - beta);
  }
  return g;
}

}  // namespace spikesot
