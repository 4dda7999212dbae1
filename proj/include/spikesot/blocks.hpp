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

// Backbone building blocks. Every sub-operator starts with SN(.) and returns
// a dense membrane-domain tensor; residuals add in that dense domain.

#include <optional>
#include <string>

#include "spikesot/attention.hpp"
#include "spikesot/layers.hpp"

namespace spikesot {

/// pw(SN(dw(SN(pw(SN(U)))))). Without the leading SN the input must already
/// be spikes.
struct SsConvSpec {
  std::optional<NeuronLayer> sn_in;
  ConvLayer pw1;
  NeuronLayer sn_mid;
  ConvLayer dw;
  NeuronLayer sn_dw;
  ConvLayer pw2;

  static SsConvSpec make(ParamBuilder& pb, const std::string& name, std::size_t in,
                         std::size_t mid, std::size_t out, const NeuronConfig& nc, double gain,
                         bool leading_sn = true);
  ag::Var operator()(const ag::Var& u, const Exec& exec) const;
};

/// 1x1 conv (C -> rC) and 1x1 conv (rC -> C), each after SN.
struct ChannelConvSpec {
  NeuronLayer sn1;
  ConvLayer conv1;
  NeuronLayer sn2;
  ConvLayer conv2;

  static ChannelConvSpec make(ParamBuilder& pb, const std::string& name, std::size_t channels,
                              std::size_t ratio, const NeuronConfig& nc, double gain);
  ag::Var operator()(const ag::Var& u, const Exec& exec) const;
};

/// Linear (C -> rC) and linear (rC -> C) on tokens, each after SN.
struct ChannelMlpSpec {
  NeuronLayer sn1;
  LinearLayer fc1;
  NeuronLayer sn2;
  LinearLayer fc2;

  static ChannelMlpSpec make(ParamBuilder& pb, const std::string& name, std::size_t channels,
                             std::size_t ratio, const NeuronConfig& nc, double gain);
  ag::Var operator()(const ag::Var& tokens, const Exec& exec) const;
};

struct BlockConfig {
  std::size_t channels = 16;
  std::size_t ssconv_mid = 0;  // 0: equal to channels
  std::size_t mlp_ratio = 4;
  double gamma = 2.0;
  std::size_t heads = 1;
  AttentionOrder order = AttentionOrder::linear;
  double gain = 1.0;
  NeuronConfig neuron;
};

/// U' = U + SSConv(U); U'' = U' + ChannelConv(U').
struct CnnBlockSpec {
  std::string name;
  SsConvSpec ssconv;
  ChannelConvSpec channel_conv;

  static CnnBlockSpec make(ParamBuilder& pb, const std::string& name, const BlockConfig& cfg);
  ag::Var operator()(const ag::Var& u, const Exec& exec) const;
};

/// U' = U + SSConv(U); U'' = U' + E-SDSA(U'); U''' = U'' + ChannelMLP(U'').
struct TransformerBlockSpec {
  std::string name;
  SsConvSpec ssconv;
  EsdsaSpec esdsa;
  ChannelMlpSpec channel_mlp;

  static TransformerBlockSpec make(ParamBuilder& pb, const std::string& name,
                                   const BlockConfig& cfg);
  ag::Var operator()(const ag::Var& u, const Exec& exec) const;
};

/// u: [T, C, H, W] (rank 3 is one timestep).
DenseTensor cnn_block(const DenseTensor& u, const CnnBlockSpec& spec, const Exec& exec = {});
DenseTensor transformer_block(const DenseTensor& u, const TransformerBlockSpec& spec,
                              const Exec& exec = {});

}  // namespace spikesot
