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

#include "spikesot/mrm.hpp"

#include <algorithm>
#include <cmath>

namespace spikesot {

namespace {

ag::Var pooled_tokens(const ag::Var& f, std::size_t grid, const NeuronLayer& sn,
                      const Exec& exec) {
  return ag::to_tokens(sn(ag::avg_pool(f, grid, grid), exec));
}

/// Per-timestep convolution on [T, N, C] tokens laid out on a grid x grid map.
ag::Var detail_construct(const ag::Var& q, const MrmSpec& spec, const Exec& exec) {
  const std::size_t T = q->value.dim(0), g = spec.cfg.grid;
  std::vector<ag::Var> planes;
  for (std::size_t t = 0; t < T; ++t) {
    const ag::Var plane = ag::from_tokens(ag::slice_time(q, t), g, g);
    planes.push_back(ag::to_tokens(spec.detail[t](plane, exec)));
  }
  return ag::concat_time(planes);
}

ag::Var fuse_and_inject(const ag::Var& q, const ag::Var& f_x, const MrmSpec& spec,
                        const Exec& exec) {
  const ag::Var pooled = ag::mean_tokens(q);
  const ag::Var w = ag::sigmoid(
      spec.weight_mlp2(spec.sn_w2(spec.weight_mlp1(spec.sn_w1(pooled, exec), exec), exec), exec));
  const ag::Var fused = ag::sum_time(ag::gate_tokens(w, q));
  const ag::Var out = spec.project_out(spec.sn_out(fused, exec), exec);
  const std::size_t g = spec.cfg.grid;
  const ag::Var map = ag::upsample(ag::from_tokens(out, g, g), f_x->value.dim(2),
                                   f_x->value.dim(3));
  const std::size_t tx = f_x->value.dim(0);
  return tx == 1 ? map : ag::repeat_time(map, tx);
}

ag::Var softmax_cross_attention(const ag::Var& q0, const MemoryEntry& mem, double scale) {
  // Forward only. q0: [T, N, C], template tokens pooled over every timestep.
  const DenseTensor& q = q0->value;
  const std::size_t T = q.dim(0), N = q.dim(1), C = q.dim(2);
  const std::size_t Tz = mem.k_s->value.dim(0), Nz = mem.k_s->value.dim(1);
  const std::size_t M = Tz * Nz;
  const DenseTensor& k = mem.k_s->value;
  const DenseTensor& v = mem.v_s->value;
  DenseTensor out({T, N, C});
  std::vector<double> logits(M);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < N; ++i) {
      double top = -1e300;
      for (std::size_t j = 0; j < M; ++j) {
        double s = 0.0;
        for (std::size_t c = 0; c < C; ++c) s += q[(t * N + i) * C + c] * k[j * C + c];
        logits[j] = s * scale;
        top = std::max(top, logits[j]);
      }
      double z = 0.0;
      for (double& l : logits) z += (l = std::exp(l - top));
      for (std::size_t j = 0; j < M; ++j)
        for (std::size_t c = 0; c < C; ++c)
          out[(t * N + i) * C + c] += logits[j] / z * v[j * C + c];
    }
  return ag::constant(std::move(out));
}

}  // namespace

MrmSpec MrmSpec::make(ParamBuilder& pb, const std::string& name, const TapGeometry& tap,
                      std::size_t template_timesteps, const MrmConfig& cfg,
                      const NeuronConfig& nc, double gain) {
  if (template_timesteps == 0) throw Error("MrmSpec: template timesteps must be >= 1");
  if (cfg.grid == 0 || cfg.grid > tap.extent)
    throw Error("MrmSpec '" + name + "': memory grid larger than the tap extent");
  ParamBuilder b = pb.sub(name);
  const std::size_t C = tap.channels;
  const std::size_t hidden = std::max<std::size_t>(1, C / 4);
  MrmSpec s;
  s.name = pb.qualified(name);
  s.layer_id = tap.layer_id;
  s.cfg = cfg;
  s.channels = C;
  s.timesteps = template_timesteps;
  s.sn_z = NeuronLayer::make(b, "sn_z", nc);
  s.sn_x = NeuronLayer::make(b, "sn_x", nc);
  s.lin_k = LinearLayer::make(b, "k", C, C, gain);
  s.lin_v = LinearLayer::make(b, "v", C, C, gain);
  s.lin_q = LinearLayer::make(b, "q", C, C, gain);
  s.sn_k = NeuronLayer::make(b, "sn_k", nc);
  s.sn_v = NeuronLayer::make(b, "sn_v", nc);
  s.sn_q = NeuronLayer::make(b, "sn_q", nc);
  s.sn_retrieve = NeuronLayer::make(b, "sn_retrieve", nc);
  for (std::size_t t = 0; t < template_timesteps; ++t)
    s.detail.push_back(
        SsConvSpec::make(b, "detail" + std::to_string(t), C, C, C, nc, gain, false));
  s.sn_state = NeuronLayer::make(b, "sn_state", nc);
  s.sn_feedback = NeuronLayer::make(b, "sn_feedback", nc);
  s.project = LinearLayer::make(b, "project", C, C, gain);
  s.layerscale = b.filled("layerscale", {C}, cfg.layerscale_init);
  s.sn_w1 = NeuronLayer::make(b, "sn_w1", nc);
  s.weight_mlp1 = LinearLayer::make(b, "weight_mlp1", C, hidden, gain);
  s.sn_w2 = NeuronLayer::make(b, "sn_w2", nc);
  s.weight_mlp2 = LinearLayer::make(b, "weight_mlp2", hidden, C, gain);
  s.sn_out = NeuronLayer::make(b, "sn_out", nc);
  s.project_out = LinearLayer::make(b, "project_out", C, C, gain);
  return s;
}

double MrmSpec::effective_scale() const {
  return cfg.scale > 0.0 ? cfg.scale : 1.0 / std::sqrt(static_cast<double>(channels));
}

const MemoryEntry& MemoryBank::at(std::size_t tap) const {
  if (tap >= entries.size() || entries[tap].empty())
    throw Error("MemoryBank: tap " + std::to_string(tap) + " not initialized");
  return entries[tap];
}

MemoryEntry build_memory(const TapFeature& f_z, const MrmSpec& spec, const Exec& exec) {
  const auto& s = f_z.tensor->value.shape();
  if (s.size() != 4 || s[1] != spec.channels)
    throw ShapeError("build_memory '" + spec.name + "'", {spec.timesteps, spec.channels, 0, 0},
                     s);
  if (s[0] != spec.timesteps)
    throw Error("build_memory '" + spec.name + "': expected " + std::to_string(spec.timesteps) +
                " template timesteps, got " + std::to_string(s[0]));
  const ag::Var z = pooled_tokens(f_z.tensor, spec.cfg.grid, spec.sn_z, exec);
  MemoryEntry e;
  e.layer_id = f_z.layer_id;
  e.timesteps = s[0];
  e.channels = spec.channels;
  e.k_s = spec.sn_k(spec.lin_k(z, exec), exec);
  e.v_s = spec.sn_v(spec.lin_v(z, exec), exec);
  const std::size_t rows = e.k_s->value.dim(0) * e.k_s->value.dim(1);
  const ag::Var k_all = ag::reshape(e.k_s, {1, rows, spec.channels});
  const ag::Var v_all = ag::reshape(e.v_s, {1, rows, spec.channels});
  if (active_profiler()) {
    const auto fl = static_cast<std::uint64_t>(rows) * spec.channels * spec.channels;
    record_layer(spec.name + ".memory", OpClass::attention_product, fl, input_firing(*k_all), 1,
                 spec.sn_k.d_cap, fl);
  }
  e.m = ag::reshape(ag::bmm_tn(k_all, v_all), {spec.channels, spec.channels});
  return e;
}

ag::Var retrieve(const ag::Var& f_x, const MemoryEntry& mem, const MrmSpec& spec,
                 const Exec& exec) {
  if (mem.empty()) throw Error("retrieve '" + spec.name + "': memory not built");
  const auto& s = f_x->value.shape();
  if (s.size() != 4 || s[1] != spec.channels || mem.channels != spec.channels)
    throw ShapeError("retrieve '" + spec.name + "'", {0, spec.channels, 0, 0}, s);
  if (spec.cfg.zero_memory_bypass && mem.m->value.all_zero()) return ag::constant(DenseTensor(s));

  const std::size_t Tz = spec.timesteps, C = spec.channels;
  ag::Var q0 = spec.sn_q(spec.lin_q(pooled_tokens(f_x, spec.cfg.grid, spec.sn_x, exec), exec),
                         exec);
  if (q0->value.dim(0) == 1 && Tz > 1) {
    q0 = ag::repeat_time(q0, Tz);
  } else if (q0->value.dim(0) != Tz) {
    throw Error("retrieve '" + spec.name + "': search timesteps must be 1 or T_z");
  }

  if (spec.cfg.variant == MrmVariant::cross_attention)
    return fuse_and_inject(softmax_cross_attention(q0, mem, spec.effective_scale()), f_x, spec,
                           exec);

  const std::size_t N = q0->value.dim(1);
  const ag::Var m = ag::repeat_time(ag::reshape(mem.m, {1, C, C}), Tz);
  ag::Var q = q0;
  for (std::size_t i = 0; i < spec.cfg.loops; ++i) {
    const ag::Var qs = i == 0 ? q0 : spec.sn_state(q, exec);
    if (active_profiler()) {
      const auto fl = static_cast<std::uint64_t>(N) * C * C;
      record_layer(spec.name + ".retrieve" + std::to_string(i), OpClass::attention_product, fl,
                   input_firing(*qs), Tz, spec.sn_q.d_cap, fl);
    }
    const ag::Var q1 = spec.sn_retrieve(ag::scale(ag::bmm(qs, m), spec.effective_scale()), exec);
    const ag::Var q2 = detail_construct(q1, spec, exec);
    const ag::Var fb = spec.project(spec.sn_feedback(ag::add(qs, q2), exec), exec);
    q = i == 0 ? fb : ag::add(q, ag::channel_scale(spec.layerscale, fb));
  }
  return fuse_and_inject(q, f_x, spec, exec);
}

}  // namespace spikesot
