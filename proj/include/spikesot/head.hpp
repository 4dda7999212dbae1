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
#include <vector>

#include "spikesot/layers.hpp"

namespace spikesot {

struct HeadConfig {
  std::size_t hidden = 0;  // 0: equal to the input width
  std::size_t depth = 1;   // SN + 3x3 conv stages before the output layer
  double score_prior_logit = -2.19;  // initial score bias, sigmoid ~ 0.1
};

/// SN -> 3x3 conv (x depth) -> SN -> 1x1 conv. The output layer has no
/// neuron after it.
struct HeadTower {
  std::vector<NeuronLayer> sns;
  std::vector<ConvLayer> convs;
  NeuronLayer sn_out;
  ConvLayer out;

  ag::Var operator()(const ag::Var& f, const Exec& exec) const;
};

struct HeadOutput {
  ag::Var score;   // [1, n, n], sigmoid
  ag::Var offset;  // [2, n, n], sigmoid, cell units (x, y)
  ag::Var size;    // [2, n, n], sigmoid, normalized (w, h)
  std::size_t n = 0;
};

struct HeadSpec {
  std::string name;
  std::size_t channels = 0;
  HeadTower score, offset, size;

  static HeadSpec make(ParamBuilder& pb, const std::string& name, std::size_t channels,
                       const HeadConfig& cfg, const NeuronConfig& nc, double gain);
  /// f: [T, C, n, n]. Tower logits are averaged over T before the sigmoid.
  HeadOutput operator()(const ag::Var& f, const Exec& exec) const;
};

HeadOutput head_forward(const DenseTensor& f, const HeadSpec& spec, const Exec& exec = {});

struct BoxPrediction {
  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;
  double score = 0.0;
  std::size_t cell = 0;  // flat index of the selected cell
};

enum class PenaltyMode { multiplicative, weighted_sum };

struct PenaltyOptions {
  PenaltyMode mode = PenaltyMode::multiplicative;
  double window_weight = 0.5;  // weighted_sum: (1 - w) * score + w * window
};

/// Selects argmax(score (x) penalty) (smallest flat index on ties) and reads
/// offset and size there. The reported score is the unpenalized one. Box
/// values are clamped to the unit square.
BoxPrediction decode_box(const DenseTensor& score, const DenseTensor& offset,
                         const DenseTensor& size, const DenseTensor* penalty = nullptr,
                         const PenaltyOptions& opt = {});

struct TargetEncoding {
  std::size_t ix = 0, iy = 0;
  double off_x = 0.0, off_y = 0.0;
  double w = 0.0, h = 0.0;

  std::size_t cell(std::size_t n) const { return iy * n + ix; }
};

/// Inverse of decode at the cell containing the box center.
TargetEncoding encode_targets(const BoxPrediction& gt, std::size_t n);

}  // namespace spikesot
