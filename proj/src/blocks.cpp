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

#include "spikesot/blocks.hpp"

namespace spikesot {

namespace {

void require_block_input(const std::string& name, const ag::Var& u, std::size_t channels) {
  const auto& s = u->value.shape();
  if (s.size() != 4 || s[1] != channels) throw ShapeError(name, {0, channels, 0, 0}, s);
}

ag::Var with_time_axis(const DenseTensor& u) {
  if (u.rank() == 3) return ag::constant(u.reshaped({1, u.dim(0), u.dim(1), u.dim(2)}));
  return ag::constant(u);
}

DenseTensor restore_rank(const DenseTensor& out, const DenseTensor& in) {
  return in.rank() == 3 ? out.reshaped(in.shape()) : out;
}

}  // namespace

SsConvSpec SsConvSpec::make(ParamBuilder& pb, const std::string& name, std::size_t in,
                            std::size_t mid, std::size_t out, const NeuronConfig& nc,
                            double gain, bool leading_sn) {
  ParamBuilder b = pb.sub(name);
  SsConvSpec s;
  if (leading_sn) s.sn_in = NeuronLayer::make(b, "sn_in", nc);
  s.pw1 = ConvLayer::make(b, "pw1", ConvGeometry::make(ConvKind::pointwise, in, mid, 1), gain);
  s.sn_mid = NeuronLayer::make(b, "sn_mid", nc);
  s.dw = ConvLayer::make(b, "dw", ConvGeometry::make(ConvKind::depthwise, mid, mid, 3), gain);
  s.sn_dw = NeuronLayer::make(b, "sn_dw", nc);
  s.pw2 = ConvLayer::make(b, "pw2", ConvGeometry::make(ConvKind::pointwise, mid, out, 1), gain);
  return s;
}

ag::Var SsConvSpec::operator()(const ag::Var& u, const Exec& exec) const {
  ag::Var x = sn_in ? (*sn_in)(u, exec) : u;
  x = sn_mid(pw1(x, exec), exec);
  x = sn_dw(dw(x, exec), exec);
  return pw2(x, exec);
}

ChannelConvSpec ChannelConvSpec::make(ParamBuilder& pb, const std::string& name,
                                      std::size_t channels, std::size_t ratio,
                                      const NeuronConfig& nc, double gain) {
  ParamBuilder b = pb.sub(name);
  const std::size_t hidden = channels * ratio;
  ChannelConvSpec s;
  s.sn1 = NeuronLayer::make(b, "sn1", nc);
  s.conv1 =
      ConvLayer::make(b, "conv1", ConvGeometry::make(ConvKind::pointwise, channels, hidden, 1), gain);
  s.sn2 = NeuronLayer::make(b, "sn2", nc);
  s.conv2 =
      ConvLayer::make(b, "conv2", ConvGeometry::make(ConvKind::pointwise, hidden, channels, 1), gain);
  return s;
}

ag::Var ChannelConvSpec::operator()(const ag::Var& u, const Exec& exec) const {
  return conv2(sn2(conv1(sn1(u, exec), exec), exec), exec);
}

ChannelMlpSpec ChannelMlpSpec::make(ParamBuilder& pb, const std::string& name,
                                    std::size_t channels, std::size_t ratio,
                                    const NeuronConfig& nc, double gain) {
  ParamBuilder b = pb.sub(name);
  ChannelMlpSpec s;
  s.sn1 = NeuronLayer::make(b, "sn1", nc);
  s.fc1 = LinearLayer::make(b, "fc1", channels, channels * ratio, gain);
  s.sn2 = NeuronLayer::make(b, "sn2", nc);
  s.fc2 = LinearLayer::make(b, "fc2", channels * ratio, channels, gain);
  return s;
}

ag::Var ChannelMlpSpec::operator()(const ag::Var& tokens, const Exec& exec) const {
  return fc2(sn2(fc1(sn1(tokens, exec), exec), exec), exec);
}

CnnBlockSpec CnnBlockSpec::make(ParamBuilder& pb, const std::string& name,
                                const BlockConfig& cfg) {
  ParamBuilder b = pb.sub(name);
  const std::size_t C = cfg.channels, mid = cfg.ssconv_mid ? cfg.ssconv_mid : C;
  CnnBlockSpec s;
  s.name = pb.qualified(name);
  s.ssconv = SsConvSpec::make(b, "ssconv", C, mid, C, cfg.neuron, cfg.gain);
  s.channel_conv = ChannelConvSpec::make(b, "channel_conv", C, cfg.mlp_ratio, cfg.neuron, cfg.gain);
  return s;
}

ag::Var CnnBlockSpec::operator()(const ag::Var& u, const Exec& exec) const {
  require_block_input(name, u, ssconv.pw1.geometry.in_channels);
  const ag::Var u1 = ag::add(u, ssconv(u, exec));
  return ag::add(u1, channel_conv(u1, exec));
}

TransformerBlockSpec TransformerBlockSpec::make(ParamBuilder& pb, const std::string& name,
                                                const BlockConfig& cfg) {
  ParamBuilder b = pb.sub(name);
  const std::size_t C = cfg.channels, mid = cfg.ssconv_mid ? cfg.ssconv_mid : C;
  TransformerBlockSpec s;
  s.name = pb.qualified(name);
  s.ssconv = SsConvSpec::make(b, "ssconv", C, mid, C, cfg.neuron, cfg.gain);
  s.esdsa = EsdsaSpec::make(b, "esdsa", C, cfg.gamma, cfg.heads, cfg.neuron, cfg.gain);
  s.esdsa.order = cfg.order;
  s.channel_mlp = ChannelMlpSpec::make(b, "channel_mlp", C, cfg.mlp_ratio, cfg.neuron, cfg.gain);
  return s;
}

ag::Var TransformerBlockSpec::operator()(const ag::Var& u, const Exec& exec) const {
  require_block_input(name, u, esdsa.channels);
  const std::size_t h = u->value.dim(2), w = u->value.dim(3);
  const ag::Var u1 = ag::add(u, ssconv(u, exec));
  const ag::Var t1 = ag::to_tokens(u1);
  const ag::Var t2 = ag::add(t1, esdsa(t1, exec));
  const ag::Var t3 = ag::add(t2, channel_mlp(t2, exec));
  return ag::from_tokens(t3, h, w);
}

DenseTensor cnn_block(const DenseTensor& u, const CnnBlockSpec& spec, const Exec& exec) {
  return restore_rank(spec(with_time_axis(u), exec)->value, u);
}

DenseTensor transformer_block(const DenseTensor& u, const TransformerBlockSpec& spec,
                              const Exec& exec) {
  return restore_rank(spec(with_time_axis(u), exec)->value, u);
}

}  // namespace spikesot
