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
#include "spikesot/head.hpp"

using namespace spikesot;

namespace {

struct Maps {
  DenseTensor score, offset, size;
  explicit Maps(std::size_t n)
      : score({1, n, n}, 0.1), offset({2, n, n}, 0.5), size({2, n, n}, 0.25) {}
};

}  // namespace

TEST_CASE("zero weights give score 0.5 everywhere") {
  ParamStore store;
  Initializer init(1);
  ParamBuilder pb(store, init);
  NeuronConfig nc;
  const HeadSpec h = HeadSpec::make(pb, "head", 8, HeadConfig{}, nc, 4.0);
  for (auto& [name, var] : store.entries())
    if (name.find("theta") == std::string::npos) var->value.fill(0.0);
  std::mt19937_64 rng(2);
  const HeadOutput o = head_forward(testutil::random_dense(rng, {2, 8, 5, 5}), h);
  CHECK(o.n == 5);
  CHECK(o.score->value.shape() == Shape{1, 5, 5});
  CHECK(o.offset->value.shape() == Shape{2, 5, 5});
  CHECK(o.size->value.shape() == Shape{2, 5, 5});
  for (double v : o.score->value.data()) CHECK(v == 0.5);
}

TEST_CASE("score prior sets the initial confidence") {
  ParamStore store;
  Initializer init(3);
  ParamBuilder pb(store, init);
  const HeadSpec h = HeadSpec::make(pb, "head", 8, HeadConfig{}, NeuronConfig{}, 4.0);
  const HeadOutput o = head_forward(DenseTensor({1, 8, 4, 4}), h);
  for (double v : o.score->value.data()) CHECK(v == doctest::Approx(1.0 / (1.0 + std::exp(2.19))));
}

TEST_CASE("decode reads offset and size at the peak cell") {
  Maps m(8);
  m.score[2 * 8 + 3] = 0.9;  // row 2, column 3
  m.size[2 * 8 + 3] = 0.3;
  m.size[64 + 2 * 8 + 3] = 0.2;
  const BoxPrediction b = decode_box(m.score, m.offset, m.size);
  CHECK(b.cx == doctest::Approx(0.4375));
  CHECK(b.cy == doctest::Approx(0.3125));
  CHECK(b.w == doctest::Approx(0.3));
  CHECK(b.h == doctest::Approx(0.2));
  CHECK(b.score == doctest::Approx(0.9));
  CHECK(b.cell == 19);
}

TEST_CASE("a penalty of ones leaves the decode unchanged") {
  Maps m(6);
  std::mt19937_64 rng(4);
  m.score = testutil::random_dense(rng, {1, 6, 6}, 0.0, 1.0);
  const DenseTensor ones({6, 6}, 1.0);
  const BoxPrediction a = decode_box(m.score, m.offset, m.size);
  const BoxPrediction b = decode_box(m.score, m.offset, m.size, &ones);
  CHECK(a.cell == b.cell);
  CHECK(a.score == b.score);
}

TEST_CASE("ties go to the smallest index") {
  Maps m(4);
  m.score.fill(0.7);
  CHECK(decode_box(m.score, m.offset, m.size).cell == 0);
}

TEST_CASE("penalty shifts the selection and keeps the raw score") {
  Maps m(3);
  m.score[0] = 0.8;
  m.score[4] = 0.6;
  const DenseTensor win = hanning_2d(3);
  const BoxPrediction b = decode_box(m.score, m.offset, m.size, &win);
  CHECK(b.cell == 4);
  CHECK(b.score == doctest::Approx(0.6));
  PenaltyOptions ws{PenaltyMode::weighted_sum, 0.0};
  CHECK(decode_box(m.score, m.offset, m.size, &win, ws).cell == 0);
  ws.window_weight = 1.0;
  CHECK(decode_box(m.score, m.offset, m.size, &win, ws).cell == 4);
}

TEST_CASE("a center on a cell corner encodes to zero offset") {
  const TargetEncoding e = encode_targets({0.5, 0.25, 0.2, 0.1}, 8);
  CHECK(e.ix == 4);
  CHECK(e.iy == 2);
  CHECK(e.off_x == doctest::Approx(0.0));
  CHECK(e.off_y == doctest::Approx(0.0));
  CHECK(e.w == doctest::Approx(0.2));
  CHECK(e.h == doctest::Approx(0.1));
}

TEST_CASE("encode then decode round trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> c(0.01, 0.99), s(0.05, 0.9);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 3 + i % 8;
    const BoxPrediction gt{c(rng), c(rng), s(rng), s(rng)};
    const TargetEncoding e = encode_targets(gt, n);
    Maps m(n);
    m.score[e.cell(n)] = 1.0;
    m.offset[e.cell(n)] = e.off_x;
    m.offset[n * n + e.cell(n)] = e.off_y;
    m.size[e.cell(n)] = e.w;
    m.size[n * n + e.cell(n)] = e.h;
    const BoxPrediction b = decode_box(m.score, m.offset, m.size);
    CHECK(std::abs(b.cx - gt.cx) <= 1e-9);
    CHECK(std::abs(b.cy - gt.cy) <= 1e-9);
    CHECK(std::abs(b.w - gt.w) <= 1e-9);
    CHECK(std::abs(b.h - gt.h) <= 1e-9);
  }
}
