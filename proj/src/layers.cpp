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

#include "spikesot/layers.hpp"

namespace spikesot {

namespace {

int d_cap_of(const ag::Var& x) { return x->spikes ? x->spikes->d_cap() : 1; }

}  // namespace

FiringStats input_firing(const ag::Node& x) {
  if (x.spikes) return sfr_measure(*x.spikes);
  FiringStats dense;
  dense.nonzero_fraction = 1.0;
  dense.mean_integer = 1.0;
  dense.element_count = x.value.size();
  dense.timestep_count = x.value.rank() >= 2 ? x.value.dim(0) : 1;
  return dense;
}

NeuronLayer NeuronLayer::make(ParamBuilder& pb, const std::string& name, std::size_t timesteps,
                              int d_cap, std::optional<double> fixed_beta, double theta0) {
  NeuronLayer n;
  n.name = pb.qualified(name);
  n.d_cap = d_cap;
  if (fixed_beta) {
    const auto p = NiLifParams::fixed_decay(*fixed_beta, d_cap);
    n.theta = ag::leaf(DenseTensor({1}, p.theta[0]), false);
  } else {
    n.theta = pb.filled(name + ".theta", {std::max<std::size_t>(timesteps, 1)}, theta0);
  }
  return n;
}

ag::Var NeuronLayer::operator()(const ag::Var& x, const Exec& exec) const {
  return ag::spiking(x, theta, d_cap, exec.mode);
}

ConvLayer ConvLayer::make(ParamBuilder& pb, const std::string& name, const ConvGeometry& g,
                          double gain, bool with_bias) {
  g.validate();
  ConvLayer c;
  c.name = pb.qualified(name);
  c.geometry = g;
  c.weight = pb.weight(name + ".weight", g.weight_shape(), g.kernel * g.kernel * g.in_per_group(),
                       gain);
  if (with_bias) c.bias = pb.filled(name + ".bias", {g.out_channels}, 0.0);
  return c;
}

ConvSpec ConvLayer::spec() const {
  ConvSpec s{geometry, weight->value, std::nullopt};
  if (bias) s.bias = bias->value;
  return s;
}

ag::Var ConvLayer::operator()(const ag::Var& x, const Exec& exec) const {
  if (active_profiler()) {
    const auto& s = x->value.shape();
    if (s.size() != 4) throw ShapeError(name, {0, geometry.in_channels, 0, 0}, s);
    const auto fl = conv_macs(geometry, s[2], s[3]);
    record_layer(name, op_class, fl, input_firing(*x), s[0], d_cap_of(x), fl);
  }
  return ag::conv2d(x, geometry, weight, bias, exec.path);
}

LinearLayer LinearLayer::make(ParamBuilder& pb, const std::string& name, std::size_t in,
                              std::size_t out, double gain, bool with_bias) {
  LinearLayer l;
  l.name = pb.qualified(name);
  l.weight = pb.weight(name + ".weight", {out, in}, in, gain);
  if (with_bias) l.bias = pb.filled(name + ".bias", {out}, 0.0);
  l.expansion = static_cast<double>(out) / static_cast<double>(in);
  return l;
}

LinearSpec LinearLayer::spec() const {
  LinearSpec s{in_features(), out_features(), weight->value, std::nullopt, expansion};
  if (bias) s.bias = bias->value;
  return s;
}

ag::Var LinearLayer::operator()(const ag::Var& x, const Exec& exec) const {
  if (active_profiler()) {
    const auto& s = x->value.shape();
    const std::size_t T = s.size() >= 2 ? s[0] : 1;
    const std::size_t rows = x->value.size() / (T * in_features());
    const std::uint64_t fl = static_cast<std::uint64_t>(rows) * in_features() * out_features();
    record_layer(name, op_class, fl, input_firing(*x), T, d_cap_of(x), fl);
  }
  return ag::linear(x, weight, bias, exec.path);
}

}  // namespace spikesot
