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

#include "json.hpp"
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "spikesot/tracker.hpp"

using namespace spikesot;

namespace {

LayerEnergyRecord rec(OpClass c, std::uint64_t fl, std::vector<double> rates) {
  LayerEnergyRecord r;
  r.op_class = c;
  r.flops = fl;
  r.timesteps = rates.size();
  r.rates = std::move(rates);
  return r;
}

}  // namespace

TEST_CASE("unit energy constants") {
  const EnergyModel m;
  CHECK(layer_energy(rec(OpClass::conv_ac, 1000, {1.0}), m) == doctest::Approx(900.0));
  CHECK(layer_energy(rec(OpClass::first_conv_mac, 1000, {1.0}), m) == doctest::Approx(4600.0));
  CHECK(layer_energy(rec(OpClass::conv_ac, 1000, {0.5, 0.25}), m) == doctest::Approx(675.0));
  CHECK(layer_energy(rec(OpClass::scale_absent, 1000, {1.0}), m) == 0.0);
  CHECK(layer_energy(rec(OpClass::softmax_absent, 1000, {1.0}), m) == 0.0);
  CHECK(ann_energy(0.0) == 0.0);
  CHECK(pj_to_mj(ann_energy(1e9)) == doctest::Approx(4.6));
}

TEST_CASE("the two rate readings") {
  LayerEnergyRecord r;
  r.op_class = OpClass::linear_ac;
  r.flops = 100;
  r.timesteps = 2;
  r.d_cap = 4;
  r.firing = {0.25, 0.6, 10, 2};
  CHECK(rate_sum(r, RateReading::nonzero_times_dcap) == doctest::Approx(2.0));
  CHECK(rate_sum(r, RateReading::mean_integer) == doctest::Approx(1.2));
  CHECK(layer_energy(r, {}, RateReading::mean_integer) == doctest::Approx(108.0));
}

TEST_CASE("template amortization") {
  CHECK(amortize_template(25.0, 25) == doctest::Approx(1.0));
  CHECK(amortize_template(7.0, 1) == 7.0);
  CHECK_THROWS(amortize_template(1.0, 0));
}

TEST_CASE("report totals add up and amortize the template branch") {
  std::vector<LayerEnergyRecord> rs{rec(OpClass::first_conv_mac, 100, {1.0}),
                                    rec(OpClass::conv_ac, 200, {0.5}),
                                    rec(OpClass::linear_ac, 300, {0.2})};
  rs[2].branch = "template";
  const EnergyReport rep = energy_report(rs, {}, 10);
  double sum = 0.0;
  for (const auto& row : rep.rows) sum += row.energy_pj_integer;
  CHECK(rep.total.snn_pj_integer == doctest::Approx(sum));
  const double search = 4.6 * 100 + 0.9 * 200 * 0.5, templ = 0.9 * 300 * 0.2;
  CHECK(rep.branches.at("search").snn_pj_integer == doctest::Approx(search));
  CHECK(rep.per_frame.snn_pj_integer == doctest::Approx(search + templ / 10));
  const auto j = nlohmann::json::parse(report_json(rep));
  CHECK(j.is_object());
  CHECK_FALSE(format_report(rep).empty());
}

TEST_CASE("profiler scopes and branch tags") {
  EnergyProfiler p;
  CHECK(active_profiler() == nullptr);
  {
    ProfilerScope s(&p);
    CHECK(active_profiler() == &p);
    record_layer("a", OpClass::conv_ac, 10, {}, 2, 4, 10);
    {
      BranchScope b("template");
      record_layer("b", OpClass::conv_ac, 5, {}, 1, 4, 5);
    }
    CHECK(active_branch() == "search");
  }
  CHECK(active_profiler() == nullptr);
  REQUIRE(p.records().size() == 2);
  CHECK(p.records()[1].branch == "template");
  CHECK(p.flops("search") == 20);
  CHECK(p.flops("template") == 5);
}

TEST_CASE("a silent network costs only its first convolution") {
  ModelConfig cfg;
  cfg.backbone.channels = {8, 8, 16, 16};
  cfg.backbone.depths = {1, 1, 1, 1};
  auto model = TrackerModel::create(cfg, 1);
  for (auto& [name, var] : model->params().entries())
    if (name.find("theta") == std::string::npos) var->value.fill(0.0);
  EnergyProfiler p;
  {
    ProfilerScope s(&p);
    Tracker t(*model, TrackerConfig{});
    DenseTensor frame({3, 64, 64}, 0.5);
    t.init(frame, {26, 26, 12, 12});
    t.track(frame);
  }
  const EnergyReport rep = energy_report(p.records());
  double first = 0.0;
  for (const auto& row : rep.rows)
    if (row.op_class == OpClass::first_conv_mac) first += row.energy_pj_integer;
  CHECK(first > 0.0);
  CHECK(rep.total.snn_pj_integer == doctest::Approx(first));
}

TEST_CASE("firing table ingest") {
  std::istringstream in(
      "# comment\n"
      "stage,block,index,op,t1,t2,flops\n"
      "1,DownSampling,1,Conv,0.5,0.5,1000\n"
      "2,ConvFormer,1,PWConv1,0.2,0.4,2000\n"
      "4,TransFormer,1,Head-QKV,1.0,1.0,10\n");
  const auto rs = load_sfr_table(in, "template");
  REQUIRE(rs.size() == 3);
  CHECK(rs[0].op_class == OpClass::first_conv_mac);
  CHECK(rs[1].op_class == OpClass::conv_ac);
  CHECK(rs[0].branch == "template");
  CHECK(rs[1].flops == 2000);
  CHECK(layer_energy(rs[0], {}) == doctest::Approx(4.6 * 1000 * 1.0));
  CHECK(layer_energy(rs[1], {}) == doctest::Approx(0.9 * 2000 * 0.6));
}

TEST_CASE("malformed tables are rejected") {
  std::istringstream bad_op("stage,block,index,op,t1\n1,ConvFormer,1,Mystery,0.5\n");
  CHECK_THROWS(load_sfr_table(bad_op, "search"));
  std::istringstream bad_val("stage,block,index,op,t1\n1,ConvFormer,1,PWConv1,abc\n");
  CHECK_THROWS(load_sfr_table(bad_val, "search"));
  std::istringstream short_row("stage,block,index,op,t1,t2\n1,ConvFormer,1,PWConv1,0.5\n");
  CHECK_THROWS(load_sfr_table(short_row, "search"));
}

TEST_CASE("bundled template table loads") {
  const auto rs = load_sfr_table(std::string(SPIKESOT_DATA_DIR) + "/sfr_base256_t3_template.csv",
                                 "template");
  CHECK(rs.size() == 123);
  for (const auto& r : rs) CHECK(r.rates.size() == 3);
}

TEST_CASE("op class names round trip") {
  for (auto c : {OpClass::first_conv_mac, OpClass::conv_ac, OpClass::linear_ac,
                 OpClass::attention_qkv, OpClass::attention_product, OpClass::softmax_absent,
                 OpClass::scale_absent})
    CHECK(op_class_from_string(to_string(c)) == c);
  CHECK_THROWS(op_class_from_string("bogus"));
}
