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

#include <cstdint>
#include <functional>
#include <vector>

#include "spikesot/image.hpp"
#include "spikesot/loss.hpp"
#include "spikesot/model.hpp"

namespace spikesot {

/// A bright square moving over a dark background.
struct SyntheticConfig {
  std::size_t frame_size = 64;
  std::size_t frames = 50;
  double square = 12.0;      // side in pixels
  double speed = 0.6;        // pixels per frame
  double background = 0.05;
  double foreground = 1.0;
  std::uint64_t seed = 7;
};

struct SyntheticSequence {
  std::vector<DenseTensor> frames;  // [3, S, S]
  std::vector<PixelBox> boxes;
};

/// The square bounces inside the frame along a seeded direction.
SyntheticSequence make_moving_square(const SyntheticConfig& cfg);

struct TrainSample {
  DenseTensor templates;  // [T_z, 3, S, S]
  DenseTensor search;     // [3, S, S]
  BoxPrediction gt;       // crop-normalized
};

struct PairConfig {
  double expansion = 4.0;
  /// Search crops are centered on the ground truth moved by up to
  /// shift * crop side in each axis, with the crop box scaled by
  /// exp(U(-scale, scale)). Zero for both reproduces the tracker's crops.
  double shift = 0.2;
  double scale = 0.25;
  std::size_t per_frame = 1;
  std::uint64_t seed = 11;
};

/// Template crops from frame 0; search crops from every later frame.
std::vector<TrainSample> make_training_pairs(const SyntheticSequence& seq,
                                             const ModelConfig& cfg, const PairConfig& pc = {});

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
  std::size_t steps = 200;
  double lr = 1e-3;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double momentum = 0.9;  // sgd
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;  // adam
  double weight_decay = 0.0;
  double grad_clip = 10.0;  // global norm; <= 0 disables
  std::size_t batch = 1;    // samples averaged per step
  LossConfig loss;
  Exec exec;
};

struct TrainStep {
  std::size_t step = 0;
  double total = 0.0;
  LossComponents parts;
};

/// Cycles through the samples, `batch` per step, and updates every parameter
/// through the tape. Throws on a non-finite loss.
std::vector<TrainStep> toy_train(TrackerModel& model, const std::vector<TrainSample>& samples,
                                 const TrainConfig& cfg,
                                 const std::function<void(const TrainStep&)>& on_step = {});

/// Mean loss of the model over the samples, no parameter change.
double evaluate_loss(const TrackerModel& model, const std::vector<TrainSample>& samples,
                     const LossConfig& loss = {}, const Exec& exec = {});

}  // namespace spikesot
