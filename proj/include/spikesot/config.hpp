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

// Run configuration as YAML. Every key is optional; defaults are the
// desk-scale model. Unknown keys are rejected.
//
//   variant: desk
//   seed: 1
//   model:
//     input_size: 64            # divisible by 16 (32 with extra_stage)
//     channels: [16, 32, 64, 128]
//     depths: [1, 1, 2, 2]
//     mlp_ratio: 4
//     gamma: 2
//     heads: 1
//     attention_order: linear   # linear | quadratic
//     d_cap: 4
//     template_timesteps: 1
//     search_timesteps: 1
//     fixed_beta: 0.5           # omit for learnable decay
//     theta0: 0
//     init_gain: 4
//     extra_stage: false
//     mrm: {loops: 1, grid: 0, scale: 0, layerscale_init: 0.01,
//           zero_memory_bypass: true, variant: retrieval}
//     head: {hidden: 0, depth: 1, score_prior_logit: -2.19}
//   tracker:
//     preset: default           # default | lasot, applied before the keys below
//     crop_expansion: 4
//     update_interval: 25
//     update_threshold: 0.7
//     hanning: true
//     penalty: multiplicative   # multiplicative | weighted_sum
//     window_weight: 0.5
//     size_rate: 1
//     exec_path: ac             # ac | mac
//   paths: {weights: "", frames: "", init_box: "", out: "", energy_report: ""}

#include <cstdint>
#include <string>

#include "spikesot/tracker.hpp"

namespace spikesot {

struct RunPaths {
  std::string weights, frames, init_box, out, energy_report;
};

struct RunConfig {
  std::string variant = "desk";
  std::uint64_t seed = 1;
  ModelConfig model;
  std::string preset = "default";
  TrackerConfig tracker;
  RunPaths paths;

  void validate() const;
};

/// A non-empty `preset_override` replaces tracker.preset; explicit tracker
/// keys still apply on top of it.
RunConfig parse_run_config(const std::string& yaml_text, const std::string& preset_override = {});
RunConfig load_run_config(const std::string& path, const std::string& preset_override = {});
std::string dump_run_config(const RunConfig& cfg);

}  // namespace spikesot
