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

#include "doctest.h"
#include "helpers.hpp"
#include "spikesot/train.hpp"

using namespace spikesot;

namespace {

ModelConfig tiny_model() {
  ModelConfig c;
  c.backbone.channels = {8, 8, 16, 16};
  c.backbone.depths = {1, 1, 1, 1};
  c.backbone.mlp_ratio = 2;
  c.backbone.input_size = 48;
  return c;
}

}  // namespace

TEST_CASE("giou loss of identical boxes is zero") {
  const BoxPrediction b{0.4, 0.6, 0.2, 0.3};
  CHECK(giou_loss(b, b).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(l1_loss(b, b).value == 0.0);
}

TEST_CASE("giou loss of disjoint distant boxes approaches two") {
  const BoxPrediction a{0.5, 0.5, 1.0, 1.0}, b{10.5, 10.5, 1.0, 1.0};
  CHECK(giou_loss(a, b).value == doctest::Approx(1.0 + 119.0 / 121.0));
  const BoxPrediction c{1000.5, 1000.5, 1.0, 1.0};
  CHECK(giou_loss(a, c).value > 1.999);
  CHECK(giou_loss(a, c).value <= 2.0);
}

TEST_CASE("box loss gradients match central differences") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> c(0.2, 0.8), s(0.1, 0.5);
  for (int i = 0; i < 100; ++i) {
    const BoxPrediction p{c(rng), c(rng), s(rng), s(rng)}, g{c(rng), c(rng), s(rng), s(rng)};
    for (auto fn : {&giou_loss, &l1_loss}) {
      const BoxLoss l = fn(p, g);
      for (int k = 0; k < 4; ++k) {
        BoxPrediction hi = p, lo = p;
        const double h = 1e-6;
        (&hi.cx)[k] += h;
        (&lo.cx)[k] -= h;
        const double fd = (fn(hi, g).value - fn(lo, g).value) / (2 * h);
        CHECK(std::abs(fd - l.grad[k]) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("focal loss on a uniform 2x2 map") {
  const DenseTensor score({1, 2, 2}, 0.5);
  DenseTensor target({1, 2, 2});
  target[0] = 1.0;
  // Positive: 0.25 ln 2. Each negative: 0.25 ln 2. One positive cell.
  CHECK(weighted_focal_loss(score, target).value == doctest::Approx(std::log(2.0)));
}

TEST_CASE("focal loss is small for a perfect prediction and never negative") {
  DenseTensor target({1, 3, 3});
  target[4] = 1.0;
  CHECK(weighted_focal_loss(target, target).value < 1e-9);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const DenseTensor s = testutil::random_dense(rng, {1, 3, 3}, 0.0, 1.0);
    const FocalLoss f = weighted_focal_loss(s, gaussian_target(3, {1, 1}, 0.8));
    CHECK(f.value >= 0.0);
  }
}

TEST_CASE("focal gradient matches central differences") {
  std::mt19937_64 rng(3);
  const DenseTensor s = testutil::random_dense(rng, {1, 4, 4}, 0.05, 0.95);
  const DenseTensor t = gaussian_target(4, {2, 1}, 1.0);
  const FocalLoss f = weighted_focal_loss(s, t);
  for (std::size_t i = 0; i < s.size(); ++i) {
    DenseTensor hi = s, lo = s;
    hi[i] += 1e-6;
    lo[i] -= 1e-6;
    const double fd = (weighted_focal_loss(hi, t).value - weighted_focal_loss(lo, t).value) / 2e-6;
    CHECK(std::abs(fd - f.grad[i]) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("gaussian target peaks at one on the target cell") {
  const TargetEncoding e{3, 1};
  const DenseTensor g = gaussian_target(5, e, 1.0);
  CHECK(g[e.cell(5)] == 1.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (i != e.cell(5)) CHECK(g[i] < 1.0);
  CHECK(gaussian_sigma({0.5, 0.5, 0.01, 0.01}, 8) == 0.5);
  CHECK(gaussian_sigma({0.5, 0.5, 0.6, 0.6}, 10) == doctest::Approx(1.0));
}

TEST_CASE("total loss weights") {
  CHECK(total_loss({1, 1, 1}) == doctest::Approx(8.0));
  CHECK(total_loss({0, 0, 0}) == 0.0);
  LossConfig no_giou;
  no_giou.lambda_giou = 0.0;
  CHECK(total_loss({1, 1, 1}, no_giou) == doctest::Approx(6.0));
  LossConfig bad;
  bad.lambda_l1 = -1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("mean loss does not depend on sample order") {
  const ModelConfig cfg = tiny_model();
  auto model = TrackerModel::create(cfg, 1);
  SyntheticConfig sc;
  sc.frame_size = 48;
  sc.frames = 5;
  auto samples = make_training_pairs(make_moving_square(sc), cfg);
  const double a = evaluate_loss(*model, samples);
  std::reverse(samples.begin(), samples.end());
  CHECK(evaluate_loss(*model, samples) == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("zero learning rate keeps the loss constant") {
  const ModelConfig cfg = tiny_model();
  auto model = TrackerModel::create(cfg, 2);
  SyntheticConfig sc;
  sc.frame_size = 48;
  sc.frames = 2;
  const auto samples = make_training_pairs(make_moving_square(sc), cfg);
  TrainConfig tc;
  tc.steps = 3;
  tc.lr = 0.0;
  const auto hist = toy_train(*model, samples, tc);
  REQUIRE(hist.size() == 3);
  CHECK(hist[1].total == hist[0].total);
  CHECK(hist[2].total == hist[0].total);
}

TEST_CASE("training on one pair reduces its loss") {
  const ModelConfig cfg = tiny_model();
  auto model = TrackerModel::create(cfg, 3);
  SyntheticConfig sc;
  sc.frame_size = 48;
  sc.square = 10.0;
  sc.frames = 2;
  PairConfig pc;
  pc.shift = 0.0;
  pc.scale = 0.0;
  const auto samples = make_training_pairs(make_moving_square(sc), cfg, pc);
  REQUIRE(samples.size() == 1);
  const double before = evaluate_loss(*model, samples);
  TrainConfig tc;
  tc.steps = 200;
  tc.optimizer = OptimizerKind::adam;
  toy_train(*model, samples, tc);
  CHECK(evaluate_loss(*model, samples) < 0.3 * before);
}
