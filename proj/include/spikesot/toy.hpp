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

// Desk-scale overfit run: train on jittered crops of one synthetic sequence,
// then track the same sequence from its first box.

#include <cstdint>
#include <functional>
#include <vector>

#include "spikesot/tracker.hpp"
#include "spikesot/train.hpp"

namespace spikesot {

struct ToyOverfitConfig {
  SyntheticConfig sequence;
  PairConfig pairs;
  TrainConfig train;
  ModelConfig model;
  TrackerConfig tracker;
  std::uint64_t seed = 1;  // weights and sample order

  static ToyOverfitConfig defaults();
};

struct ToyOverfitResult {
  double initial_loss = 0.0;  // mean over the training samples before training
  double final_loss = 0.0;    // same samples after training
  double mean_iou = 0.0;      // tracked frames 1..F-1
  double train_seconds = 0.0;
  double total_seconds = 0.0;
  std::vector<TrainStep> history;
  std::vector<TrackResult> track;
  std::vector<double> ious;
};

ToyOverfitResult run_toy_overfit(const ToyOverfitConfig& cfg,
                                 const std::function<void(const TrainStep&)>& on_step = {},
                                 std::unique_ptr<TrackerModel>* trained = nullptr);

}  // namespace spikesot
