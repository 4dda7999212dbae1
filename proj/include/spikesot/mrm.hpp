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

// Memory retrieval between the template and search branches, one module per
// tap. Template side (once per template set):
//
//   K_S, V_S = SN(Linear(SN(pool(F_Z))))        per timestep, N = g*g tokens
//   M        = sum_t K_S[t]^T V_S[t]            [C, C]
//
// Search side (every frame):
//
//   Q^0   = SN(Linear(SN(pool(F_X)))), replicated to T_z planes
//   loop i = 0 .. loops-1, with Q_S^0 = Q^0 and Q_S^i = SN(Q^i):
//     Q'      = SN(Q_S^i M scale)
//     Q''[t]  = SSConv_t(Q'[t])
//     Q^{i+1} = Project(SN(Q_S^i + Q''))                    i = 0
//     Q^{i+1} = Q^i + ls * Project(SN(Q_S^i + Q''))         i >= 1
//   w_t   = sigmoid(MLP2(SN(MLP1(SN(mean_tokens(Q^N[t]))))))
//   out   = Linear(SN(sum_t w_t * Q^N[t])), upsampled to the tap extent
//
// Neuron populations start from rest on every iteration; weights are shared
// across iterations.

#include <string>
#include <vector>

#include "spikesot/backbone.hpp"

namespace spikesot {

enum class MrmVariant {
  retrieval,
  /// softmax(Q K^T) V over all template tokens; forward only, for comparisons.
  cross_attention,
};

struct MrmConfig {
  std::size_t loops = 1;
  std::size_t grid = 0;  // memory token grid side; 0: final-stage extent
  double scale = 0.0;    // <= 0 selects 1/sqrt(C)
  double layerscale_init = 1e-2;
  /// With an all-zero memory the module injects nothing.
  bool zero_memory_bypass = true;
  MrmVariant variant = MrmVariant::retrieval;
};

struct MrmSpec {
  std::string name;
  std::string layer_id;
  MrmConfig cfg;
  std::size_t channels = 0;
  std::size_t timesteps = 1;  // T_z

  NeuronLayer sn_z, sn_x;
  LinearLayer lin_k, lin_v, lin_q;
  NeuronLayer sn_k, sn_v, sn_q;
  NeuronLayer sn_retrieve;
  std::vector<SsConvSpec> detail;  // one per template timestep
  NeuronLayer sn_state;            // Q_S^i = SN(Q^i), i >= 1
  NeuronLayer sn_feedback;
  LinearLayer project;
  ag::Var layerscale;  // [C]
  NeuronLayer sn_w1, sn_w2;
  LinearLayer weight_mlp1, weight_mlp2;
  NeuronLayer sn_out;
  LinearLayer project_out;

  static MrmSpec make(ParamBuilder& pb, const std::string& name, const TapGeometry& tap,
                      std::size_t template_timesteps, const MrmConfig& cfg,
                      const NeuronConfig& nc, double gain);
  double effective_scale() const;
};

struct MemoryEntry {
  std::string layer_id;
  ag::Var m;              // [C, C]
  ag::Var k_s, v_s;       // [T_z, N, C] spikes
  std::size_t timesteps = 0;
  std::size_t channels = 0;

  bool empty() const { return !m; }
};

struct MemoryBank {
  std::vector<MemoryEntry> entries;  // tap order
  std::size_t generation = 0;        // increments on every rebuild

  bool initialized() const { return !entries.empty(); }
  const MemoryEntry& at(std::size_t tap) const;
};

/// f_z: the tap feature of the template pass, [T_z, C, h, w].
MemoryEntry build_memory(const TapFeature& f_z, const MrmSpec& spec, const Exec& exec = {});

/// f_x: the search tap feature [T_x, C, h, w]. Returns the tensor to add to
/// the search stream (same shape as f_x).
ag::Var retrieve(const ag::Var& f_x, const MemoryEntry& mem, const MrmSpec& spec,
                 const Exec& exec = {});

}  // namespace spikesot
