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

#include "spikesot/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace spikesot {

namespace {

void check_keys(const YAML::Node& n, const std::string& where, const std::set<std::string>& known) {
  if (!n) return;
  if (!n.IsMap()) throw Error("config: '" + where + "' must be a mapping");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw Error("config: unknown key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const YAML::Node& n, const char* key, T& out) {
  if (n && n[key]) out = n[key].as<T>();
}

AttentionOrder parse_order(const std::string& s) {
  if (s == "linear") return AttentionOrder::linear;
  if (s == "quadratic") return AttentionOrder::quadratic;
  throw Error("config: attention_order must be linear or quadratic, got '" + s + "'");
}

MrmVariant parse_variant(const std::string& s) {
  if (s == "retrieval") return MrmVariant::retrieval;
  if (s == "cross_attention") return MrmVariant::cross_attention;
  throw Error("config: mrm variant must be retrieval or cross_attention, got '" + s + "'");
}

PenaltyMode parse_penalty(const std::string& s) {
  if (s == "multiplicative") return PenaltyMode::multiplicative;
  if (s == "weighted_sum") return PenaltyMode::weighted_sum;
  throw Error("config: penalty must be multiplicative or weighted_sum, got '" + s + "'");
}

ExecPath parse_path(const std::string& s) {
  if (s == "ac") return ExecPath::ac;
  if (s == "mac") return ExecPath::mac;
  throw Error("config: exec_path must be ac or mac, got '" + s + "'");
}

void read_model(const YAML::Node& n, ModelConfig& m) {
  check_keys(n, "model",
             {"input_size", "channels", "depths", "mlp_ratio", "gamma", "heads", "attention_order",
              "d_cap", "template_timesteps", "search_timesteps", "fixed_beta", "theta0",
              "init_gain", "extra_stage", "mrm", "head"});
  if (!n) return;
  BackboneConfig& b = m.backbone;
  read(n, "input_size", b.input_size);
  read(n, "channels", b.channels);
  read(n, "depths", b.depths);
  read(n, "mlp_ratio", b.mlp_ratio);
  read(n, "gamma", b.gamma);
  read(n, "heads", b.heads);
  if (n["attention_order"]) b.order = parse_order(n["attention_order"].as<std::string>());
  read(n, "d_cap", b.d_cap);
  read(n, "template_timesteps", b.template_timesteps);
  read(n, "search_timesteps", b.search_timesteps);
  if (n["fixed_beta"]) b.fixed_beta = n["fixed_beta"].as<double>();
  read(n, "theta0", b.theta0);
  read(n, "init_gain", b.init_gain);
  read(n, "extra_stage", b.extra_stage);

  const YAML::Node mr = n["mrm"];
  check_keys(mr, "model.mrm",
             {"loops", "grid", "scale", "layerscale_init", "zero_memory_bypass", "variant"});
  read(mr, "loops", m.mrm.loops);
  read(mr, "grid", m.mrm.grid);
  read(mr, "scale", m.mrm.scale);
  read(mr, "layerscale_init", m.mrm.layerscale_init);
  read(mr, "zero_memory_bypass", m.mrm.zero_memory_bypass);
  if (mr && mr["variant"]) m.mrm.variant = parse_variant(mr["variant"].as<std::string>());

  const YAML::Node h = n["head"];
  check_keys(h, "model.head", {"hidden", "depth", "score_prior_logit"});
  read(h, "hidden", m.head.hidden);
  read(h, "depth", m.head.depth);
  read(h, "score_prior_logit", m.head.score_prior_logit);
}

void read_tracker(const YAML::Node& n, RunConfig& rc, const std::string& preset_override) {
  check_keys(n, "tracker",
             {"preset", "crop_expansion", "update_interval", "update_threshold", "hanning",
              "penalty", "window_weight", "size_rate", "exec_path"});
  read(n, "preset", rc.preset);
  if (!preset_override.empty()) rc.preset = preset_override;
  rc.tracker = TrackerConfig::preset(rc.preset);
  if (!n) return;
  TrackerConfig& t = rc.tracker;
  read(n, "crop_expansion", t.crop_expansion);
  read(n, "update_interval", t.update_interval);
  read(n, "update_threshold", t.update_threshold);
  read(n, "hanning", t.hanning);
  if (n["penalty"]) t.penalty.mode = parse_penalty(n["penalty"].as<std::string>());
  read(n, "window_weight", t.penalty.window_weight);
  read(n, "size_rate", t.size_rate);
  if (n["exec_path"]) t.exec.path = parse_path(n["exec_path"].as<std::string>());
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  tracker.validate();
}

RunConfig parse_run_config(const std::string& yaml_text, const std::string& preset_override) {
  RunConfig rc;
  try {
    const YAML::Node root = YAML::Load(yaml_text);
    if (root.IsNull()) {
      if (!preset_override.empty()) {
        rc.preset = preset_override;
        rc.tracker = TrackerConfig::preset(rc.preset);
      }
      return rc;
    }
    check_keys(root, "", {"variant", "seed", "model", "tracker", "paths"});
    read(root, "variant", rc.variant);
    read(root, "seed", rc.seed);
    read_model(root["model"], rc.model);
    read_tracker(root["tracker"], rc, preset_override);
    const YAML::Node p = root["paths"];
    check_keys(p, "paths", {"weights", "frames", "init_box", "out", "energy_report"});
    read(p, "weights", rc.paths.weights);
    read(p, "frames", rc.paths.frames);
    read(p, "init_box", rc.paths.init_box);
    read(p, "out", rc.paths.out);
    read(p, "energy_report", rc.paths.energy_report);
  } catch (const YAML::Exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  rc.validate();
  return rc;
}

RunConfig load_run_config(const std::string& path, const std::string& preset_override) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), preset_override);
}

std::string dump_run_config(const RunConfig& rc) {
  const BackboneConfig& b = rc.model.backbone;
  const MrmConfig& m = rc.model.mrm;
  const TrackerConfig& t = rc.tracker;
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "variant" << YAML::Value << rc.variant;
  e << YAML::Key << "seed" << YAML::Value << rc.seed;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "input_size" << YAML::Value << b.input_size;
  e << YAML::Key << "channels" << YAML::Value << YAML::Flow << b.channels;
  e << YAML::Key << "depths" << YAML::Value << YAML::Flow << b.depths;
  e << YAML::Key << "mlp_ratio" << YAML::Value << b.mlp_ratio;
  e << YAML::Key << "gamma" << YAML::Value << b.gamma;
  e << YAML::Key << "heads" << YAML::Value << b.heads;
  e << YAML::Key << "attention_order" << YAML::Value
    << (b.order == AttentionOrder::linear ? "linear" : "quadratic");
  e << YAML::Key << "d_cap" << YAML::Value << b.d_cap;
  e << YAML::Key << "template_timesteps" << YAML::Value << b.template_timesteps;
  e << YAML::Key << "search_timesteps" << YAML::Value << b.search_timesteps;
  if (b.fixed_beta) e << YAML::Key << "fixed_beta" << YAML::Value << *b.fixed_beta;
  e << YAML::Key << "theta0" << YAML::Value << b.theta0;
  e << YAML::Key << "init_gain" << YAML::Value << b.init_gain;
  e << YAML::Key << "extra_stage" << YAML::Value << b.extra_stage;
  e << YAML::Key << "mrm" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "loops" << YAML::Value << m.loops;
  e << YAML::Key << "grid" << YAML::Value << m.grid;
  e << YAML::Key << "scale" << YAML::Value << m.scale;
  e << YAML::Key << "layerscale_init" << YAML::Value << m.layerscale_init;
  e << YAML::Key << "zero_memory_bypass" << YAML::Value << m.zero_memory_bypass;
  e << YAML::Key << "variant" << YAML::Value
    << (m.variant == MrmVariant::retrieval ? "retrieval" : "cross_attention");
  e << YAML::EndMap;
  e << YAML::Key << "head" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "hidden" << YAML::Value << rc.model.head.hidden;
  e << YAML::Key << "depth" << YAML::Value << rc.model.head.depth;
  e << YAML::Key << "score_prior_logit" << YAML::Value << rc.model.head.score_prior_logit;
  e << YAML::EndMap << YAML::EndMap;
  e << YAML::Key << "tracker" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "preset" << YAML::Value << rc.preset;
  e << YAML::Key << "crop_expansion" << YAML::Value << t.crop_expansion;
  e << YAML::Key << "update_interval" << YAML::Value << t.update_interval;
  e << YAML::Key << "update_threshold" << YAML::Value << t.update_threshold;
  e << YAML::Key << "hanning" << YAML::Value << t.hanning;
  e << YAML::Key << "penalty" << YAML::Value
    << (t.penalty.mode == PenaltyMode::multiplicative ? "multiplicative" : "weighted_sum");
  e << YAML::Key << "window_weight" << YAML::Value << t.penalty.window_weight;
  e << YAML::Key << "size_rate" << YAML::Value << t.size_rate;
  e << YAML::Key << "exec_path" << YAML::Value << (t.exec.path == ExecPath::ac ? "ac" : "mac");
  e << YAML::EndMap;
  e << YAML::Key << "paths" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "weights" << YAML::Value << rc.paths.weights;
  e << YAML::Key << "frames" << YAML::Value << rc.paths.frames;
  e << YAML::Key << "init_box" << YAML::Value << rc.paths.init_box;
  e << YAML::Key << "out" << YAML::Value << rc.paths.out;
  e << YAML::Key << "energy_report" << YAML::Value << rc.paths.energy_report;
  e << YAML::EndMap << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace spikesot
