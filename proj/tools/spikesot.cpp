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

// spikesot: track, profile, train-toy, selftest, gen-weights.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "spikesot/acceptance.hpp"
#include "spikesot/config.hpp"
#include "spikesot/toy.hpp"

using namespace spikesot;

namespace {

struct CommonFlags {
  std::string config, weights, frames, init_box, out, energy_report, preset;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "YAML run configuration");
  cmd->add_option("--weights", f.weights, "weight manifest (.json)");
  cmd->add_option("--frames", f.frames, "directory of frame images");
  cmd->add_option("--init-box", f.init_box, "file with the first box: x,y,w,h");
  cmd->add_option("--out", f.out, "output file (default: stdout)");
  cmd->add_option("--energy-report", f.energy_report, "write an energy report (JSON)");
  cmd->add_option("--seed", f.seed, "weight initialization seed");
  cmd->add_option("--preset", f.preset, "tracker preset")
      ->check(CLI::IsMember({"default", "lasot"}));
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig rc = f.config.empty() ? parse_run_config("", f.preset)
                                  : load_run_config(f.config, f.preset);
  if (!f.weights.empty()) rc.paths.weights = f.weights;
  if (!f.frames.empty()) rc.paths.frames = f.frames;
  if (!f.init_box.empty()) rc.paths.init_box = f.init_box;
  if (!f.out.empty()) rc.paths.out = f.out;
  if (!f.energy_report.empty()) rc.paths.energy_report = f.energy_report;
  if (f.seed) rc.seed = *f.seed;
  return rc;
}

std::unique_ptr<TrackerModel> make_model(const RunConfig& rc) {
  auto model = TrackerModel::create(rc.model, rc.seed);
  if (!rc.paths.weights.empty()) load_weights(model->params(), rc.paths.weights);
  return model;
}

// Writes to the named file, or stdout when the name is empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) throw Error("cannot write " + path);
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream o(path);
  if (!o) throw Error("cannot write " + path);
  o << text;
}

std::string box_line(std::size_t idx, const PixelBox& b, double score) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu %.3f %.3f %.3f %.3f %.6f", idx, b.x, b.y, b.w, b.h, score);
  return buf;
}

int cmd_track(const CommonFlags& f) {
  const RunConfig rc = resolve(f);
  if (rc.paths.frames.empty()) throw Error("track: --frames is required");
  if (rc.paths.init_box.empty()) throw Error("track: --init-box is required");
  const auto files = list_frames(rc.paths.frames);
  const PixelBox box = read_init_box(rc.paths.init_box);
  auto model = make_model(rc);

  const bool energy = !rc.paths.energy_report.empty();
  std::vector<LayerEnergyRecord> all;
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  auto profiled = [&](std::size_t idx, auto&& body) {
    if (!energy) return body();
    EnergyProfiler p;
    auto r = [&] {
      ProfilerScope scope(&p);
      return body();
    }();
    const EnergyReport rep = energy_report(p.records());
    frames.push_back({{"frame", idx},
                      {"snn_pj_fraction", rep.total.snn_pj_fraction},
                      {"snn_pj_integer", rep.total.snn_pj_integer},
                      {"ann_pj", rep.total.ann_pj}});
    all.insert(all.end(), p.records().begin(), p.records().end());
    return r;
  };

  Sink sink(rc.paths.out);
  Tracker tracker(*model, rc.tracker);
  profiled(0, [&] {
    tracker.init(load_frame(files[0]), box);
    return 0;
  });
  sink.stream() << box_line(0, box, 1.0) << '\n';
  for (std::size_t i = 1; i < files.size(); ++i) {
    const TrackResult r = profiled(i, [&] { return tracker.track(load_frame(files[i])); });
    sink.stream() << box_line(i, r.box, r.score) << '\n';
  }
  sink.stream().flush();

  if (energy) {
    nlohmann::ordered_json j;
    j["run"] = nlohmann::ordered_json::parse(report_json(energy_report(all)));
    j["frames"] = std::move(frames);
    write_text(rc.paths.energy_report, j.dump(2) + "\n");
  }
  return 0;
}

struct ProfileFlags {
  std::string sfr_table;
  std::string branch = "template";
  int d_cap = 4;
};

int cmd_profile(const CommonFlags& f, const ProfileFlags& pf) {
  const RunConfig rc = resolve(f);
  EnergyReport rep;
  if (!pf.sfr_table.empty()) {
    rep = energy_report(load_sfr_table(pf.sfr_table, pf.branch, pf.d_cap), {},
                        rc.tracker.update_interval);
  } else {
    if (rc.paths.weights.empty()) throw Error("profile: --weights is required");
    auto model = make_model(rc);
    DenseTensor first, second;
    PixelBox box;
    if (!rc.paths.frames.empty()) {
      const auto files = list_frames(rc.paths.frames);
      if (files.size() < 2) throw Error("profile: need at least two frames");
      if (rc.paths.init_box.empty()) throw Error("profile: --init-box is required with --frames");
      first = load_frame(files[0]);
      second = load_frame(files[1]);
      box = read_init_box(rc.paths.init_box);
    } else {
      SyntheticConfig sc;
      sc.frame_size = rc.model.backbone.input_size;
      sc.frames = 2;
      sc.seed = rc.seed;
      const SyntheticSequence seq = make_moving_square(sc);
      first = seq.frames[0];
      second = seq.frames[1];
      box = seq.boxes[0];
    }
    EnergyProfiler p;
    {
      ProfilerScope scope(&p);
      Tracker t(*model, rc.tracker);
      t.init(first, box);
      t.track(second);
    }
    rep = energy_report(p.records(), {}, rc.tracker.update_interval);
  }
  Sink sink(rc.paths.out);
  sink.stream() << format_report(rep);
  if (!rc.paths.energy_report.empty()) write_text(rc.paths.energy_report, report_json(rep));
  return 0;
}

struct ToyFlags {
  std::optional<std::size_t> steps;
  std::string weights_out;
  std::size_t log_every = 25;
};

int cmd_train_toy(const CommonFlags& f, const ToyFlags& tf) {
  ToyOverfitConfig cfg = ToyOverfitConfig::defaults();
  if (f.seed) cfg.seed = *f.seed;
  if (tf.steps) cfg.train.steps = *tf.steps;
  std::unique_ptr<TrackerModel> trained;
  const ToyOverfitResult r = run_toy_overfit(
      cfg,
      [&](const TrainStep& s) {
        if (tf.log_every && (s.step % tf.log_every == 0 || s.step + 1 == cfg.train.steps))
          std::printf("step %zu loss %.4f (cls %.4f giou %.4f l1 %.4f)\n", s.step, s.total,
                      s.parts.cls, s.parts.giou, s.parts.l1);
      },
      &trained);
  Sink sink(f.out);
  for (const auto& t : r.track) sink.stream() << box_line(t.frame_index, t.box, t.score) << '\n';
  std::printf("loss %.4f -> %.4f, mean IoU %.3f, train %.1f s, total %.1f s\n", r.initial_loss,
              r.final_loss, r.mean_iou, r.train_seconds, r.total_seconds);
  if (!tf.weights_out.empty()) save_weights(trained->params(), tf.weights_out);
  return 0;
}

int cmd_selftest(const std::vector<int>& only, std::uint64_t seed) {
  std::vector<int> ids = only;
  if (ids.empty())
    for (int i = 1; i <= 10; ++i) ids.push_back(i);
  for (int id : ids) {
    AcceptanceOptions opt;
    opt.only = {id};
    opt.seed = seed;
    for (const auto& r : run_acceptance(opt)) {
      std::printf("%s\n", format_result(r).c_str());
      std::fflush(stdout);
      if (!r.pass) return 1;
    }
  }
  return 0;
}

int cmd_gen_weights(const CommonFlags& f, bool zero) {
  const RunConfig rc = resolve(f);
  if (rc.paths.out.empty()) throw Error("gen-weights: --out is required");
  auto model = TrackerModel::create(rc.model, rc.seed);
  if (zero)
    for (auto& [name, var] : model->params().entries())
      if (name.find("theta") == std::string::npos) var->value.fill(0.0);
  save_weights(model->params(), rc.paths.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spike-driven single-object tracker"};
  app.require_subcommand(1);

  CommonFlags track_f, profile_f, toy_f, gen_f;
  auto* track = app.add_subcommand("track", "track a box through a frame directory");
  add_common(track, track_f);

  ProfileFlags pf;
  auto* profile = app.add_subcommand("profile", "energy report for one template/search pair");
  add_common(profile, profile_f);
  profile->add_option("--sfr-table", pf.sfr_table, "firing-rate table (CSV); skips the network");
  profile->add_option("--branch", pf.branch, "branch tag for table rows");
  profile->add_option("--d-cap", pf.d_cap, "integer cap for table rows");

  ToyFlags tf;
  auto* toy = app.add_subcommand("train-toy", "overfit a synthetic sequence and track it");
  toy->add_option("--seed", toy_f.seed, "weight and sample-order seed");
  toy->add_option("--steps", tf.steps, "training steps");
  toy->add_option("--out", toy_f.out, "tracked boxes (default: stdout)");
  toy->add_option("--weights-out", tf.weights_out, "save the trained weights");
  toy->add_option("--log-every", tf.log_every, "loss print interval (0: silent)");

  std::vector<int> only;
  std::uint64_t st_seed = 2026;
  auto* selftest = app.add_subcommand("selftest", "run the acceptance checks");
  selftest->add_option("--only", only, "check ids (1-10)")->check(CLI::Range(1, 10));
  selftest->add_option("--seed", st_seed, "seed for randomized cases");

  bool zero = false;
  auto* gen = app.add_subcommand("gen-weights", "write randomly initialized weights");
  add_common(gen, gen_f);
  gen->add_flag("--zero", zero, "zero every weight and bias");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*track) return cmd_track(track_f);
    if (*profile) return cmd_profile(profile_f, pf);
    if (*toy) return cmd_train_toy(toy_f, tf);
    if (*selftest) return cmd_selftest(only, st_seed);
    if (*gen) return cmd_gen_weights(gen_f, zero);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
