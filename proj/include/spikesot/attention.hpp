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

#include "spikesot/layers.hpp"

namespace spikesot {

/// (Q K^T) V costs O(N^2 C); Q (K^T V) costs O(N C^2).
enum class AttentionOrder { quadratic, linear };

/// Softmax-free spike attention over tokens [T, N, C].
struct EsdsaSpec {
  std::string name;
  std::size_t channels = 0;     // C_attn
  std::size_t token_count = 0;  // 0 accepts any N
  double gamma = 2.0;
  double scale = 0.0;  // <= 0 selects 1/sqrt(C_attn)
  std::size_t heads = 1;
  AttentionOrder order = AttentionOrder::linear;

  std::optional<NeuronLayer> sn_in;  // head SN on the dense residual stream
  LinearLayer q, k, v, out;
  NeuronLayer sn_q, sn_k, sn_v, sn_attn;

  static EsdsaSpec make(ParamBuilder& pb, const std::string& name, std::size_t channels,
                        double gamma, std::size_t heads, const NeuronConfig& nc, double gain,
                        bool head_sn = true);

  std::size_t value_width() const { return v.out_features(); }
  double effective_scale() const;
  void validate() const;

  /// Spike tokens in, dense tokens out: SN(Linear) projections, the product in
  /// the requested order, SN, output projection.
  ag::Var attend(const ag::Var& spikes, const Exec& exec, AttentionOrder order) const;
  /// Dense residual-stream tokens; applies the head SN first.
  ag::Var operator()(const ag::Var& tokens, const Exec& exec) const;
};

/// The bare product A = Q K^T V * scale, evaluated in either order, per head.
/// q, k: [T, N, C], v: [T, N, Cv].
ag::Var attention_product(const ag::Var& q, const ag::Var& k, const ag::Var& v,
                          AttentionOrder order, double scale, std::size_t heads = 1);

/// u: spike tokens [T, N, C] (rank 2 is one timestep).
DenseTensor esdsa_forward(const SpikeTensor& u, const EsdsaSpec& spec, AttentionOrder order,
                          const Exec& exec = {});

/// M = K^T V. k: [N, C] or [T, N, C]; v likewise with width Cv. Rank-3 inputs
/// are summed over T. Result [C, Cv].
DenseTensor kv_memory(const SpikeTensor& k, const SpikeTensor& v);

}  // namespace spikesot
