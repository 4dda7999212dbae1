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

// Asymmetric siamese backbone. Topology (input H):
//
//   stem   7x7/2 conv on the image               H/2
//   stage1 CNN blocks
//   ds2    SN + 3x3/2 conv            -> tap      H/4
//   stage2 CNN blocks
//   ds3    SN + 3x3/2 conv            -> tap      H/8
//   stage3 Transformer blocks, tap after block max(1, L3/2)
//   ds4    SN + 3x3/2 conv            -> tap      H/16
//   stage4 Transformer blocks         -> tap (final)
//   [ds5 + one Transformer block at H/32, optional, no tap]
//
// The template branch runs over T_z timesteps (one template per timestep),
// the search branch over T_x. Both read the same parameters.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spikesot/blocks.hpp"

namespace spikesot {

struct BackboneConfig {
  std::vector<std::size_t> channels{16, 32, 64, 128};
  std::vector<std::size_t> depths{1, 1, 2, 2};
  std::size_t mlp_ratio = 4;
  double gamma = 2.0;
  std::size_t heads = 1;
  AttentionOrder order = AttentionOrder::linear;
  int d_cap = 4;
  std::size_t template_timesteps = 1;
  std::size_t search_timesteps = 1;
  std::optional<double> fixed_beta;
  double theta0 = 0.0;
  double init_gain = 4.0;  // no normalization layers, so weights start large
  bool extra_stage = false;
  std::size_t input_size = 64;
  std::size_t in_channels = 3;

  void validate() const;
  NeuronConfig neuron() const;
  BlockConfig block(std::size_t stage) const;
  /// Input side must be divisible by this.
  std::size_t stride() const { return extra_stage ? 32 : 16; }
  /// Block (1-based) after which the stage-3 midpoint tap is taken.
  std::size_t stage3_tap_block() const { return std::max<std::size_t>(1, depths[2] / 2); }
};

/// Tap identifiers, in network order.
const std::vector<std::string>& tap_ids();

struct TapGeometry {
  std::string layer_id;
  std::size_t channels = 0;
  std::size_t extent = 0;  // square spatial side
};

std::vector<TapGeometry> tap_geometry(const BackboneConfig& cfg);

struct TapFeature {
  std::string layer_id;
  std::size_t index = 0;
  ag::Var tensor;  // dense membrane-domain [T, C, h, w]
  std::size_t height = 0, width = 0, channels = 0;
};

struct Downsample {
  NeuronLayer sn;
  ConvLayer conv;
};

class Backbone {
 public:
  /// Sees each tap feature and returns the tensor the network continues with.
  using TapHook = std::function<ag::Var(const TapFeature&)>;

  static Backbone make(ParamBuilder& pb, const BackboneConfig& cfg);

  const BackboneConfig& config() const { return cfg_; }

  /// image: [T, 3, H, W]. Returns the final feature (stage 4, or the extra
  /// stage when enabled).
  ag::Var forward(const ag::Var& image, const Exec& exec, const TapHook& hook = {}) const;

 private:
  BackboneConfig cfg_;
  ConvLayer stem_;
  std::vector<CnnBlockSpec> stage1_, stage2_;
  Downsample ds2_, ds3_, ds4_;
  std::vector<TransformerBlockSpec> stage3_, stage4_;
  std::optional<Downsample> ds5_;
  std::optional<TransformerBlockSpec> stage5_;
};

/// Template pass: images [T_z, 3, H, W] with one template per timestep.
std::vector<TapFeature> template_forward(const Backbone& net, const DenseTensor& images,
                                         const Exec& exec = {});

/// Stacks per-timestep images [3, H, W] into [T, 3, H, W].
DenseTensor stack_frames(const std::vector<DenseTensor>& frames);

}  // namespace spikesot
