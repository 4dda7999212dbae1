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
#include <memory>
#include <vector>

#include "spikesot/backbone.hpp"
#include "spikesot/head.hpp"
#include "spikesot/mrm.hpp"

namespace spikesot {

struct ModelConfig {
  BackboneConfig backbone;
  MrmConfig mrm;
  HeadConfig head;

  void validate() const;
};

/// Backbone, one memory module per tap, and the prediction head, all in one
/// parameter store.
class TrackerModel {
 public:
  static std::unique_ptr<TrackerModel> create(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const Backbone& backbone() const { return backbone_; }
  const std::vector<MrmSpec>& mrms() const { return mrms_; }
  const HeadSpec& head() const { return head_; }
  HeadSpec& head() { return head_; }

  /// Template pass over [T_z, 3, H, W] and memory construction at every tap.
  MemoryBank build_bank(const DenseTensor& templates, const Exec& exec = {}) const;

  /// Search pass: x is [3, H, W] (repeated over T_x timesteps) or
  /// [T_x, 3, H, W]. Returns the final
  /// backbone feature with memory cues injected at every tap.
  ag::Var search_forward(const DenseTensor& x, const MemoryBank& bank,
                         const Exec& exec = {}) const;

  HeadOutput predict(const DenseTensor& x, const MemoryBank& bank, const Exec& exec = {}) const;

 private:
  ModelConfig cfg_;
  ParamStore store_;
  Backbone backbone_;
  std::vector<MrmSpec> mrms_;
  HeadSpec head_;
};

/// Free-function form of TrackerModel::search_forward.
ag::Var search_forward(const TrackerModel& model, const DenseTensor& x, const MemoryBank& bank,
                       const Exec& exec = {});

}  // namespace spikesot
