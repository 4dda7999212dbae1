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

#include "spikesot/backbone.hpp"

namespace spikesot {

namespace {

Downsample make_downsample(ParamBuilder& pb, const std::string& name, std::size_t in,
                           std::size_t out, const BackboneConfig& cfg) {
  ParamBuilder b = pb.sub(name);
  return {NeuronLayer::make(b, "sn", cfg.neuron()),
          ConvLayer::make(b, "conv", ConvGeometry::make(ConvKind::full, in, out, 3, 2),
                          cfg.init_gain)};
}

ag::Var apply(const Downsample& d, const ag::Var& x, const Exec& exec) {
  return d.conv(d.sn(x, exec), exec);
}

}  // namespace

void BackboneConfig::validate() const {
  if (channels.size() != 4 || depths.size() != 4)
    throw Error("BackboneConfig: need four stage widths and four depths");
  for (std::size_t c : channels)
    if (c == 0) throw Error("BackboneConfig: zero channel width");
  if (depths[2] == 0 || depths[3] == 0)
    throw Error("BackboneConfig: transformer stages need at least one block (tap points)");
  if (d_cap < 1) throw Error("BackboneConfig: d_cap must be >= 1");
  if (template_timesteps == 0 || search_timesteps == 0)
    throw Error("BackboneConfig: timesteps must be >= 1");
  if (input_size == 0 || input_size % stride() != 0)
    throw Error("BackboneConfig: input size " + std::to_string(input_size) +
                " not divisible by " + std::to_string(stride()));
  for (std::size_t s = 2; s < 4; ++s)
    if (channels[s] % heads != 0) throw Error("BackboneConfig: width not divisible by heads");
}

NeuronConfig BackboneConfig::neuron() const {
  return {std::max(template_timesteps, search_timesteps), d_cap, fixed_beta, theta0};
}

BlockConfig BackboneConfig::block(std::size_t stage) const {
  BlockConfig b;
  b.channels = channels.at(stage);
  b.mlp_ratio = mlp_ratio;
  b.gamma = gamma;
  b.heads = heads;
  b.order = order;
  b.gain = init_gain;
  b.neuron = neuron();
  return b;
}

const std::vector<std::string>& tap_ids() {
  static const std::vector<std::string> ids{"ds2", "ds3", "stage3_mid", "ds4", "stage4_final"};
  return ids;
}

std::vector<TapGeometry> tap_geometry(const BackboneConfig& cfg) {
  const std::size_t s = cfg.input_size;
  return {{"ds2", cfg.channels[1], s / 4},
          {"ds3", cfg.channels[2], s / 8},
          {"stage3_mid", cfg.channels[2], s / 8},
          {"ds4", cfg.channels[3], s / 16},
          {"stage4_final", cfg.channels[3], s / 16}};
}

Backbone Backbone::make(ParamBuilder& pb, const BackboneConfig& cfg) {
  cfg.validate();
  Backbone net;
  net.cfg_ = cfg;
  const auto& C = cfg.channels;
  net.stem_ = ConvLayer::make(pb, "stem",
                              ConvGeometry::make(ConvKind::full, cfg.in_channels, C[0], 7, 2),
                              cfg.init_gain);
  net.stem_.op_class = OpClass::first_conv_mac;
  for (std::size_t j = 0; j < cfg.depths[0]; ++j)
    net.stage1_.push_back(
        CnnBlockSpec::make(pb, "stage1.block" + std::to_string(j), cfg.block(0)));
  net.ds2_ = make_downsample(pb, "ds2", C[0], C[1], cfg);
  for (std::size_t j = 0; j < cfg.depths[1]; ++j)
    net.stage2_.push_back(
        CnnBlockSpec::make(pb, "stage2.block" + std::to_string(j), cfg.block(1)));
  net.ds3_ = make_downsample(pb, "ds3", C[1], C[2], cfg);
  for (std::size_t j = 0; j < cfg.depths[2]; ++j)
    net.stage3_.push_back(
        TransformerBlockSpec::make(pb, "stage3.block" + std::to_string(j), cfg.block(2)));
  net.ds4_ = make_downsample(pb, "ds4", C[2], C[3], cfg);
  for (std::size_t j = 0; j < cfg.depths[3]; ++j)
    net.stage4_.push_back(
        TransformerBlockSpec::make(pb, "stage4.block" + std::to_string(j), cfg.block(3)));
  if (cfg.extra_stage) {
    net.ds5_ = make_downsample(pb, "ds5", C[3], C[3], cfg);
    net.stage5_ = TransformerBlockSpec::make(pb, "stage5.block0", cfg.block(3));
  }
  return net;
}

ag::Var Backbone::forward(const ag::Var& image, const Exec& exec, const TapHook& hook) const {
  const auto& s = image->value.shape();
  if (s.size() != 4 || s[1] != cfg_.in_channels || s[2] != cfg_.input_size ||
      s[3] != cfg_.input_size)
    throw ShapeError("backbone input", {0, cfg_.in_channels, cfg_.input_size, cfg_.input_size},
                     s);
  std::size_t tap_index = 0;
  auto tap = [&](const std::string& id, const ag::Var& x) {
    if (tap_ids()[tap_index] != id) throw Error("backbone: tap order mismatch at " + id);
    TapFeature f{id, tap_index++, x, x->value.dim(2), x->value.dim(3), x->value.dim(1)};
    return hook ? hook(f) : x;
  };

  ag::Var x = stem_(image, exec);
  for (const auto& b : stage1_) x = b(x, exec);
  x = tap("ds2", apply(ds2_, x, exec));
  for (const auto& b : stage2_) x = b(x, exec);
  x = tap("ds3", apply(ds3_, x, exec));
  for (std::size_t j = 0; j < stage3_.size(); ++j) {
    x = stage3_[j](x, exec);
    if (j + 1 == cfg_.stage3_tap_block()) x = tap("stage3_mid", x);
  }
  x = tap("ds4", apply(ds4_, x, exec));
  for (const auto& b : stage4_) x = b(x, exec);
  x = tap("stage4_final", x);
  if (stage5_) x = (*stage5_)(apply(*ds5_, x, exec), exec);
  return x;
}

std::vector<TapFeature> template_forward(const Backbone& net, const DenseTensor& images,
                                         const Exec& exec) {
  if (images.rank() != 4 || images.dim(0) == 0)
    throw ShapeError("template_forward", {1, 3, 0, 0}, images.shape());
  std::vector<TapFeature> taps;
  BranchScope branch("template");
  net.forward(ag::constant(images), exec, [&](const TapFeature& f) {
    taps.push_back(f);
    return f.tensor;
  });
  return taps;
}

DenseTensor stack_frames(const std::vector<DenseTensor>& frames) {
  if (frames.empty()) throw Error("stack_frames: no frames");
  const Shape one = frames[0].shape();
  Shape shape{frames.size()};
  shape.insert(shape.end(), one.begin(), one.end());
  DenseTensor out(shape);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    require_shape("stack_frames", one, frames[t].shape());
    std::copy(frames[t].data().begin(), frames[t].data().end(),
              out.data().begin() + t * frames[t].size());
  }
  return out;
}

}  // namespace spikesot
