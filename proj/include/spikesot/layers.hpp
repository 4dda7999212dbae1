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

#include <optional>
#include <string>

#include "spikesot/energy.hpp"
#include "spikesot/graph.hpp"
#include "spikesot/nnops.hpp"
#include "spikesot/params.hpp"

namespace spikesot {

/// How a forward pass evaluates spike-consuming operators and neurons.
struct Exec {
  ExecPath path = ExecPath::ac;
  NeuronMode mode = NeuronMode::integer;
};

/// Shared construction settings for every neuron population in a model.
struct NeuronConfig {
  std::size_t timesteps = 1;  // theta entries (max timesteps of any branch)
  int d_cap = 4;
  std::optional<double> fixed_beta;  // freezes a single shared decay in [0, 1)
  double theta0 = 0.0;
};

/// SN(.) in the block equations: one NI-LIF population with its decay
/// parameters.
struct NeuronLayer {
  std::string name;
  ag::Var theta;
  int d_cap = 4;

  /// One learnable theta per timestep initialized at `theta0`, or a single
  /// frozen theta when `fixed_beta` is set.
  static NeuronLayer make(ParamBuilder& pb, const std::string& name, std::size_t timesteps,
                          int d_cap, std::optional<double> fixed_beta = std::nullopt,
                          double theta0 = 0.0);

  static NeuronLayer make(ParamBuilder& pb, const std::string& name, const NeuronConfig& nc) {
    return make(pb, name, nc.timesteps, nc.d_cap, nc.fixed_beta, nc.theta0);
  }

  NiLifParams params() const { return {theta->value.values(), d_cap}; }
  ag::Var operator()(const ag::Var& x, const Exec& exec) const;
};

struct ConvLayer {
  std::string name;
  ConvGeometry geometry;
  ag::Var weight;
  ag::Var bias;  // may be null
  OpClass op_class = OpClass::conv_ac;

  static ConvLayer make(ParamBuilder& pb, const std::string& name, const ConvGeometry& g,
                        double gain, bool with_bias = true);

  ConvSpec spec() const;
  /// x: [T, C, H, W]; records one energy entry when a profiler is active.
  ag::Var operator()(const ag::Var& x, const Exec& exec) const;
};

struct LinearLayer {
  std::string name;
  ag::Var weight;  // [out, in]
  ag::Var bias;    // may be null
  OpClass op_class = OpClass::linear_ac;
  double expansion = 1.0;

  static LinearLayer make(ParamBuilder& pb, const std::string& name, std::size_t in,
                          std::size_t out, double gain, bool with_bias = true);

  std::size_t in_features() const { return weight->value.dim(1); }
  std::size_t out_features() const { return weight->value.dim(0); }
  LinearSpec spec() const;
  /// x: [T, N, in] (or [T, in]).
  ag::Var operator()(const ag::Var& x, const Exec& exec) const;
};

/// Firing statistics of an operator input; dense inputs count as rate 1.
FiringStats input_firing(const ag::Node& x);

}  // namespace spikesot
