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

#include "spikesot/toy.hpp"

#include <algorithm>
#include <chrono>
#include <random>

namespace spikesot {

ToyOverfitConfig ToyOverfitConfig::defaults() {
  ToyOverfitConfig c;
  // An odd head grid puts the crop center inside a cell instead of on a
  // cell corner.
  c.model.backbone.input_size = 80;
  c.pairs.per_frame = 4;
  c.train.optimizer = OptimizerKind::adam;
  c.train.lr = 1e-3;
  c.train.batch = 2;
  return c;
}

ToyOverfitResult run_toy_overfit(const ToyOverfitConfig& cfg,
                                 const std::function<void(const TrainStep&)>& on_step,
                                 std::unique_ptr<TrackerModel>* trained) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const SyntheticSequence seq = make_moving_square(cfg.sequence);
  auto model = TrackerModel::create(cfg.model, cfg.seed);
  std::vector<TrainSample> samples = make_training_pairs(seq, cfg.model, cfg.pairs);
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(samples.begin(), samples.end(), rng);

  ToyOverfitResult r;
  r.initial_loss = evaluate_loss(*model, samples, cfg.train.loss, cfg.train.exec);
  const auto t1 = clock::now();
  r.history = toy_train(*model, samples, cfg.train, on_step);
  r.train_seconds = std::chrono::duration<double>(clock::now() - t1).count();
  r.final_loss = evaluate_loss(*model, samples, cfg.train.loss, cfg.train.exec);

  Tracker tracker(*model, cfg.tracker);
  tracker.init(seq.frames[0], seq.boxes[0]);
  double sum = 0.0;
  for (std::size_t f = 1; f < seq.frames.size(); ++f) {
    r.track.push_back(tracker.track(seq.frames[f]));
    r.ious.push_back(iou(r.track.back().box, seq.boxes[f]));
    sum += r.ious.back();
  }
  r.mean_iou = r.ious.empty() ? 0.0 : sum / static_cast<double>(r.ious.size());
  r.total_seconds = std::chrono::duration<double>(clock::now() - t0).count();
  if (trained) *trained = std::move(model);
  return r;
}

}  // namespace spikesot
