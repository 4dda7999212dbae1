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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "spikesot/config.hpp"
#include "spikesot/train.hpp"
#include "spikesot/tracker.hpp"

using namespace spikesot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("spikesot_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SPIKESOT_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Ten frames of the moving square plus its first box.
fs::path sequence_dir() {
  const fs::path dir = scratch("seq");
  SyntheticConfig sc;
  sc.frames = 10;
  const SyntheticSequence seq = make_moving_square(sc);
  fs::create_directories(dir / "frames");
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%04zu.png", i);
    save_frame(seq.frames[i], (dir / "frames" / name).string());
  }
  const PixelBox& b = seq.boxes[0];
  std::ofstream(dir / "box.txt") << b.x << "," << b.y << "," << b.w << "," << b.h << "\n";
  return dir;
}

const std::string small_model_yaml =
    "model:\n  channels: [8, 8, 16, 16]\n  depths: [1, 1, 1, 1]\n  mlp_ratio: 2\n";

}  // namespace

TEST_CASE("cli track writes one line per frame, deterministically") {
  const fs::path d = sequence_dir();
  std::ofstream(d / "cfg.yaml") << small_model_yaml;
  const std::string base = "track --config " + (d / "cfg.yaml").string() + " --frames " +
                           (d / "frames").string() + " --init-box " + (d / "box.txt").string() +
                           " --seed 3";
  REQUIRE(run(base + " --out " + (d / "a.txt").string() + " --energy-report " +
              (d / "e.json").string()) == 0);
  REQUIRE(run(base + " --out " + (d / "b.txt").string()) == 0);
  const auto out = lines(d / "a.txt");
  REQUIRE(out.size() == 10);
  CHECK(out[0].rfind("0 ", 0) == 0);
  CHECK(out[9].rfind("9 ", 0) == 0);
  std::istringstream fields(out[5]);
  std::size_t idx;
  double x, y, w, h, s;
  CHECK(static_cast<bool>(fields >> idx >> x >> y >> w >> h >> s));
  CHECK(slurp(d / "a.txt") == slurp(d / "b.txt"));

  const auto j = nlohmann::json::parse(slurp(d / "e.json"));
  REQUIRE(j["frames"].size() == 10);
  double sum = 0.0;
  for (const auto& f : j["frames"]) sum += f["snn_pj_integer"].get<double>();
  CHECK(j["run"]["total"]["snn_pj_integer"].get<double>() == doctest::Approx(sum));
}

TEST_CASE("cli track rejects an empty frame directory and a malformed box") {
  const fs::path d = sequence_dir();
  fs::create_directories(d / "empty");
  std::ofstream(d / "bad.txt") << "1,2,three\n";
  CHECK(run("track --frames " + (d / "empty").string() + " --init-box " +
            (d / "box.txt").string()) != 0);
  CHECK(run("track --frames " + (d / "frames").string() + " --init-box " +
            (d / "bad.txt").string()) != 0);
  CHECK(run("track --frames " + (d / "frames").string()) != 0);
  CHECK(run("track --frames " + (d / "frames").string() + " --init-box " +
            (d / "box.txt").string() + " --preset sideways") != 0);
}

TEST_CASE("cli profile of a zero-weight model matches the library report") {
  const fs::path d = scratch("profile");
  std::ofstream(d / "cfg.yaml") << small_model_yaml;
  const std::string cfg = " --config " + (d / "cfg.yaml").string();
  REQUIRE(run("gen-weights --zero" + cfg + " --out " + (d / "w.json").string()) == 0);
  CHECK(run("profile" + cfg) != 0);  // weights required
  REQUIRE(run("profile" + cfg + " --weights " + (d / "w.json").string() + " --energy-report " +
              (d / "r.json").string() + " --out " + (d / "r.txt").string()) == 0);
  const auto j = nlohmann::json::parse(slurp(d / "r.json"));

  const RunConfig rc = parse_run_config(small_model_yaml);
  auto model = TrackerModel::create(rc.model, rc.seed);
  load_weights(model->params(), (d / "w.json").string());
  SyntheticConfig sc;
  sc.frames = 2;
  sc.seed = rc.seed;
  const SyntheticSequence seq = make_moving_square(sc);
  EnergyProfiler p;
  {
    ProfilerScope scope(&p);
    Tracker t(*model, rc.tracker);
    t.init(seq.frames[0], seq.boxes[0]);
    t.track(seq.frames[1]);
  }
  const EnergyReport rep = energy_report(p.records(), {}, rc.tracker.update_interval);
  CHECK(j["per_frame"]["snn_pj_integer"].get<double>() ==
        doctest::Approx(rep.per_frame.snn_pj_integer));
  CHECK(j["total"]["snn_pj_fraction"].get<double>() == doctest::Approx(rep.total.snn_pj_fraction));
  // Only the first convolution draws energy in a silent network.
  double first = 0.0;
  for (const auto& row : rep.rows)
    if (row.op_class == OpClass::first_conv_mac) first += row.energy_pj_integer;
  CHECK(rep.total.snn_pj_integer == doctest::Approx(first));
}

TEST_CASE("cli profile in table mode") {
  const fs::path d = scratch("table");
  const std::string table = std::string(SPIKESOT_DATA_DIR) + "/sfr_base256_t3_template.csv";
  REQUIRE(run("profile --sfr-table " + table + " --energy-report " + (d / "r.json").string() +
              " --out " + (d / "r.txt").string()) == 0);
  const auto j = nlohmann::json::parse(slurp(d / "r.json"));
  CHECK(j["layers"].size() == 123);
  const EnergyReport rep = energy_report(load_sfr_table(table, "template"), {}, 25);
  CHECK(j["total"]["snn_pj_integer"].get<double>() == doctest::Approx(rep.total.snn_pj_integer));
  CHECK(run("profile --sfr-table /nonexistent.csv") != 0);
}

TEST_CASE("cli gen-weights is deterministic per seed") {
  const fs::path d = scratch("gen");
  REQUIRE(run("gen-weights --seed 4 --out " + (d / "a.json").string()) == 0);
  REQUIRE(run("gen-weights --seed 4 --out " + (d / "b.json").string()) == 0);
  REQUIRE(run("gen-weights --seed 5 --out " + (d / "c.json").string()) == 0);
  CHECK(slurp(d / "a.bin") == slurp(d / "b.bin"));
  CHECK(slurp(d / "a.bin") != slurp(d / "c.bin"));
  CHECK(run("gen-weights") != 0);
}

TEST_CASE("cli selftest runs a chosen check") {
  CHECK(run("selftest --only 3") == 0);
  CHECK(run("selftest --only 11") != 0);
  CHECK(run("frobnicate") != 0);
}
