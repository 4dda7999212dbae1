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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "spikesot/config.hpp"

using namespace spikesot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spikesot_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("empty config gives the defaults") {
  const RunConfig c = parse_run_config("");
  CHECK(c.variant == "desk");
  CHECK(c.model.backbone.input_size == 64);
  CHECK(c.tracker.update_interval == 25);
}

TEST_CASE("preset applies before explicit tracker keys") {
  const RunConfig c = parse_run_config("tracker:\n  preset: lasot\n  update_threshold: 0.5\n");
  CHECK(c.tracker.update_interval == 40);
  CHECK(c.tracker.update_threshold == 0.5);
}

TEST_CASE("model keys are read") {
  const RunConfig c = parse_run_config(
      "seed: 9\nmodel:\n  input_size: 96\n  channels: [8, 8, 16, 16]\n  fixed_beta: 0.25\n"
      "  attention_order: quadratic\n  mrm: {loops: 2}\n  head: {depth: 2}\n");
  CHECK(c.seed == 9);
  CHECK(c.model.backbone.input_size == 96);
  CHECK(c.model.backbone.channels[3] == 16);
  CHECK(c.model.backbone.fixed_beta.value() == 0.25);
  CHECK(c.model.backbone.order == AttentionOrder::quadratic);
  CHECK(c.model.mrm.loops == 2);
  CHECK(c.model.head.depth == 2);
}

TEST_CASE("bad configs are rejected") {
  CHECK_THROWS(parse_run_config("tracker:\n  update_intervall: 3\n"));
  CHECK_THROWS(parse_run_config("bogus: 1\n"));
  CHECK_THROWS(parse_run_config("tracker:\n  penalty: sideways\n"));
  CHECK_THROWS(parse_run_config("model:\n  input_size: 70\n"));
  CHECK_THROWS(parse_run_config("model: [1, 2\n"));
  CHECK_THROWS(load_run_config("/nonexistent/spikesot.yaml"));
}

TEST_CASE("dump and parse round trip") {
  RunConfig c = parse_run_config(
      "seed: 5\nmodel: {input_size: 80, template_timesteps: 3}\n"
      "tracker: {preset: lasot, hanning: false, size_rate: 0.5, exec_path: mac}\n"
      "paths: {frames: /tmp/f}\n");
  const RunConfig r = parse_run_config(dump_run_config(c));
  CHECK(r.seed == 5);
  CHECK(r.model.backbone.input_size == 80);
  CHECK(r.model.backbone.template_timesteps == 3);
  CHECK(r.tracker.update_interval == 40);
  CHECK_FALSE(r.tracker.hanning);
  CHECK(r.tracker.size_rate == 0.5);
  CHECK(r.tracker.exec.path == ExecPath::mac);
  CHECK(r.paths.frames == "/tmp/f");
}

TEST_CASE("weights save and load") {
  const fs::path dir = scratch("weights");
  ModelConfig cfg;
  cfg.backbone.channels = {8, 8, 16, 16};
  cfg.backbone.depths = {1, 1, 1, 1};
  auto a = TrackerModel::create(cfg, 1);
  auto b = TrackerModel::create(cfg, 2);
  save_weights(a->params(), (dir / "w.json").string());
  CHECK(fs::exists(dir / "w.bin"));
  load_weights(b->params(), (dir / "w.json").string());
  const auto& ea = a->params().entries();
  const auto& eb = b->params().entries();
  for (std::size_t i = 0; i < ea.size(); ++i)
    for (std::size_t k = 0; k < ea[i].second->value.size(); ++k)
      CHECK(eb[i].second->value[k] == static_cast<double>(static_cast<float>(ea[i].second->value[k])));

  ModelConfig other = cfg;
  other.backbone.channels = {8, 8, 16, 32};
  auto c = TrackerModel::create(other, 1);
  CHECK_THROWS(load_weights(c->params(), (dir / "w.json").string()));
}

TEST_CASE("init box parsing") {
  const fs::path dir = scratch("box");
  write(dir / "a.txt", "10,20,30,40\n");
  write(dir / "b.txt", "1.5 2.5 3 4\n");
  write(dir / "bad.txt", "1,2,3\n");
  write(dir / "neg.txt", "1,2,-3,4\n");
  const PixelBox a = read_init_box((dir / "a.txt").string());
  CHECK(a.x == 10);
  CHECK(a.h == 40);
  CHECK(read_init_box((dir / "b.txt").string()).x == 1.5);
  CHECK_THROWS(read_init_box((dir / "bad.txt").string()));
  CHECK_THROWS(read_init_box((dir / "neg.txt").string()));
  CHECK_THROWS(read_init_box((dir / "missing.txt").string()));
}

TEST_CASE("frame files") {
  const fs::path dir = scratch("frames");
  CHECK_THROWS(list_frames(dir.string()));
  std::mt19937_64 rng(1);
  const DenseTensor f = testutil::random_dense(rng, {3, 8, 8}, 0.0, 1.0);
  save_frame(f, (dir / "0001.png").string());
  save_frame(f, (dir / "0000.png").string());
  write(dir / "notes.txt", "x");
  const auto files = list_frames(dir.string());
  REQUIRE(files.size() == 2);
  CHECK(fs::path(files[0]).filename() == "0000.png");
  const DenseTensor g = load_frame(files[0]);
  CHECK(g.shape() == f.shape());
  CHECK(testutil::max_diff(f, g) <= 0.5 / 255.0 + 1e-12);
}

TEST_CASE("preset override replaces the file preset but not explicit keys") {
  const RunConfig a = parse_run_config("", "lasot");
  CHECK(a.tracker.update_interval == 40);
  const RunConfig b =
      parse_run_config("tracker: {preset: default, update_threshold: 0.6}\n", "lasot");
  CHECK(b.preset == "lasot");
  CHECK(b.tracker.update_interval == 40);
  CHECK(b.tracker.update_threshold == 0.6);
}
