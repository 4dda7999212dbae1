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
#include <string>
#include <vector>

#include "spikesot/image.hpp"
#include "spikesot/model.hpp"

namespace spikesot {

struct TrackerConfig {
  double crop_expansion = 4.0;
  std::size_t update_interval = 25;
  double update_threshold = 0.7;
  bool hanning = true;
  PenaltyOptions penalty;
  /// Fraction of the predicted size change applied per frame; 1 takes the
  /// decoded size as is.
  double size_rate = 1.0;
  /// Rebuild the memory from the template queue on every frame instead of
  /// reusing the cached one (verification mode).
  bool recompute_memory = false;
  Exec exec;

  void validate() const;
  /// "default" (25 / 0.7) or "lasot" (40 / 0.8).
  static TrackerConfig preset(const std::string& name);
};

/// Template crops, one per template timestep. Slot 0 holds the initial
/// template for the whole run; updates replace the oldest of the others.
class TemplateQueue {
 public:
  explicit TemplateQueue(std::size_t capacity = 1);

  void fill(const DenseTensor& crop);
  /// Returns false (and changes nothing) when there is no unpinned slot.
  bool push(const DenseTensor& crop);

  std::size_t capacity() const { return capacity_; }
  const std::vector<DenseTensor>& slots() const { return slots_; }
  /// [T_z, C, S, S] in timestep order.
  DenseTensor stacked() const;

 private:
  std::size_t capacity_;
  std::vector<DenseTensor> slots_;
  std::size_t next_ = 1;  // oldest unpinned slot
};

struct TrackResult {
  std::size_t frame_index = 0;
  PixelBox box;
  double score = 0.0;
  bool template_updated = false;
};

struct TrackerCounters {
  std::size_t template_passes = 0;  // init + accepted updates
  std::size_t recompute_passes = 0;  // verification-mode rebuilds
  std::size_t search_passes = 0;
};

class Tracker {
 public:
  Tracker(const TrackerModel& model, TrackerConfig cfg);

  void init(const DenseTensor& frame, const PixelBox& box);
  TrackResult track(const DenseTensor& frame);

  bool initialized() const { return bank_.initialized(); }
  const TemplateQueue& queue() const { return queue_; }
  const MemoryBank& bank() const { return bank_; }
  const TrackerCounters& counters() const { return counters_; }
  const PixelBox& last_box() const { return box_; }
  std::size_t frame_index() const { return frame_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  void rebuild_bank();

  const TrackerModel* model_;
  TrackerConfig cfg_;
  TemplateQueue queue_;
  MemoryBank bank_;
  PixelBox box_;
  std::size_t frame_ = 0;
  std::size_t input_size_;
  DenseTensor window_;
  TrackerCounters counters_;
};

/// Tracks `frames` twice from the same initialization, once with the cached
/// memory and once rebuilding it every frame, and reports whether every
/// output is bit-identical.
bool cached_vs_recomputed_check(const TrackerModel& model, const TrackerConfig& cfg,
                                const std::vector<DenseTensor>& frames, const PixelBox& init_box);

}  // namespace spikesot
