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
#include "spikesot/neuron.hpp"

using namespace spikesot;

namespace {

std::pair<int, double> step1(double h, double y, double theta, int d) {
  NeuronState st{DenseTensor({1}, {h}), 0};
  auto [s, next] = nilif_step(DenseTensor({1}, {y}), st, NiLifParams{{theta}, d});
  return {s.counts()[0], next.h[0]};
}

}  // namespace

TEST_CASE("single step") {
  SUBCASE("zero input") {
    auto [c, h] = step1(0.0, 0.0, 0.0, 4);
    CHECK(c == 0);
    CHECK(h == 0.0);
  }
  SUBCASE("charge, fire, reset") {
    // beta = 0.5: U = 0.5 + 1.3 = 1.8 -> 2 spikes, residual -0.2
    auto [c, h] = step1(1.0, 1.3, 0.0, 4);
    CHECK(c == 2);
    CHECK(h == doctest::Approx(-0.2));
  }
  SUBCASE("clipped at d_cap, residual kept") {
    auto [c, h] = step1(0.0, 100.0, 0.0, 4);
    CHECK(c == 4);
    CHECK(h == 96.0);
  }
}

TEST_CASE("sequence fold") {
  // beta = 0.5, y = 0.6: U1 = 0.6 -> 1 (h -0.4); U2 = -0.2 + 0.6 = 0.4 -> 0
  const auto out = nilif_sequence({DenseTensor({1}, {0.6}), DenseTensor({1}, {0.6})},
                                  NiLifParams{{0.0}, 4});
  CHECK(out[0].counts()[0] == 1);
  CHECK(out[1].counts()[0] == 0);

  SUBCASE("T = 1 is one step from rest") {
    std::mt19937_64 rng(3);
    const auto y = testutil::random_dense(rng, {16}, -1, 6);
    const auto seq = nilif_sequence({y}, NiLifParams{{0.3}, 4});
    const auto [s, st] = nilif_step(y, NeuronState::zeros({16}), NiLifParams{{0.3}, 4});
    CHECK(seq[0] == s);
  }
}

TEST_CASE("strong leak makes timesteps independent") {
  std::mt19937_64 rng(5);
  std::vector<DenseTensor> ys;
  for (int t = 0; t < 6; ++t) ys.push_back(testutil::random_dense(rng, {64}, -1, 6));
  const auto seq = nilif_sequence(ys, NiLifParams{{-20.0}, 4});
  for (std::size_t t = 0; t < ys.size(); ++t)
    for (std::size_t i = 0; i < 64; ++i) {
      // The leftover of the previous step is scaled by ~2e-9.
      const double frac = ys[t][i] - std::floor(ys[t][i]);
      if (std::abs(frac - 0.5) < 1e-6) continue;
      CHECK(seq[t].counts()[i] == fire_count(ys[t][i], 4));
    }
}

TEST_CASE("straight-through slope") {
  CHECK(straight_through_slope(1.2, 4) == 0.25);
  CHECK(straight_through_slope(10.0, 4) == 0.0);
  CHECK(straight_through_slope(-0.4, 4) == 0.25);
  CHECK(straight_through_slope(-0.6, 4) == 0.0);
  CHECK(straight_through_slope(4.5, 4) == 0.25);
}

TEST_CASE("conservation and range hold for random steps") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> th(-4, 4);
  for (int d : {1, 3, 4}) {
    const NiLifParams p{{th(rng)}, d};
    NeuronState st = NeuronState::zeros({256});
    for (int s = 0; s < 50; ++s) {
      const auto y = testutil::random_dense(rng, {256}, -3, d + 3);
      const double beta = p.beta(0);
      auto [spk, next] = nilif_step(y, st, p);
      for (std::size_t i = 0; i < 256; ++i) {
        const int c = spk.counts()[i];
        CHECK(c >= 0);
        CHECK(c <= d);
        CHECK(beta * st.h[i] + y[i] == doctest::Approx(c + next.h[i]).epsilon(1e-12));
      }
      st = next;
    }
  }
}

TEST_CASE("per-timestep decay parameters") {
  const auto p = NiLifParams::per_timestep(3, 4, 1.0);
  CHECK(p.theta.size() == 3);
  CHECK(p.beta(2) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(NiLifParams::fixed_decay(0.0, 4).beta(0) == 0.0);
  CHECK(NiLifParams::fixed_decay(0.25, 4).beta(0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(NiLifParams::fixed_decay(1.0, 4), Error);
}

TEST_CASE("relaxed backward matches finite differences") {
  std::mt19937_64 rng(17);
  const std::size_t T = 3, n = 20;
  DenseTensor y = testutil::random_dense(rng, {T, n}, -0.3, 4.3);
  NiLifParams p = NiLifParams::per_timestep(T, 4, 0.4);
  const DenseTensor w = testutil::random_dense(rng, {T, n});
  auto loss = [&](const DenseTensor& yy, const NiLifParams& pp) {
    const auto tr = nilif_forward(yy, pp, NeuronMode::relaxed);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * tr.output[i];
    return s;
  };
  const auto g = nilif_backward(w, nilif_forward(y, p, NeuronMode::relaxed), p);
  const double h = 1e-6;
  for (std::size_t i = 0; i < y.size(); ++i) {
    DenseTensor up = y, dn = y;
    up[i] += h;
    dn[i] -= h;
    CHECK(g.input[i] == doctest::Approx((loss(up, p) - loss(dn, p)) / (2 * h)).epsilon(1e-5));
  }
  for (std::size_t k = 0; k < T; ++k) {
    NiLifParams up = p, dn = p;
    up.theta[k] += h;
    dn.theta[k] -= h;
    CHECK(g.theta[k] == doctest::Approx((loss(y, up) - loss(y, dn)) / (2 * h)).epsilon(1e-5));
  }
}
