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

using namespace spikesot;

TEST_CASE("firing statistics") {
  SUBCASE("all zero") {
    const auto f = sfr_measure(SpikeTensor({8}, 4));
    CHECK(f.nonzero_fraction == 0.0);
    CHECK(f.mean_integer == 0.0);
  }
  SUBCASE("saturated") {
    const auto f = sfr_measure(SpikeTensor({8}, std::vector<std::int32_t>(8, 4), 4));
    CHECK(f.nonzero_fraction == 1.0);
    CHECK(f.mean_integer == 4.0);
  }
  SUBCASE("hand count") {
    const auto f = sfr_measure(SpikeTensor({8}, {0, 1, 2, 4, 0, 0, 0, 1}, 4));
    CHECK(f.nonzero_fraction == 0.5);
    CHECK(f.mean_integer == 1.0);
  }
  SUBCASE("merge weights by element count") {
    const auto a = sfr_measure(SpikeTensor({2}, {4, 4}, 4));
    const auto b = sfr_measure(SpikeTensor({6}, {0, 0, 0, 0, 0, 4}, 4));
    const auto m = merge_stats(a, b);
    CHECK(m.nonzero_fraction == doctest::Approx(3.0 / 8));
    CHECK(m.mean_integer == doctest::Approx(12.0 / 8));
  }
}

TEST_CASE("spike_to_dense divides by d_cap") {
  CHECK(spike_to_dense(SpikeTensor({1}, {4}, 4))[0] == 1.0);
  CHECK(spike_to_dense(SpikeTensor({1}, {0}, 4))[0] == 0.0);
  CHECK(spike_to_dense(SpikeTensor({1}, {3}, 4))[0] == 0.75);
}

TEST_CASE("counts outside [0, d_cap] are rejected") {
  CHECK_THROWS_AS(SpikeTensor({1}, {5}, 4), Error);
  CHECK_THROWS_AS(SpikeTensor({1}, {-1}, 4), Error);
  CHECK_THROWS_AS(SpikeTensor({1}, 0), Error);
}

TEST_CASE("unit spike expansion") {
  SUBCASE("threshold convention") {
    const auto planes = unit_spike_expand(SpikeTensor({1}, {2}, 4));
    REQUIRE(planes.size() == 4);
    CHECK(planes[0].counts()[0] == 1);
    CHECK(planes[1].counts()[0] == 1);
    CHECK(planes[2].counts()[0] == 0);
    CHECK(planes[3].counts()[0] == 0);
    for (const auto& p : planes) CHECK(p.d_cap() == 1);
  }
  SUBCASE("planes sum to the count for every count") {
    for (int d = 1; d <= 6; ++d)
      for (int c = 0; c <= d; ++c) {
        const auto planes = unit_spike_expand(SpikeTensor({1}, {c}, d));
        int sum = 0;
        for (const auto& p : planes) sum += p.counts()[0];
        CHECK(sum == c);
      }
  }
}

TEST_CASE("leading-axis concat and slice are inverse") {
  std::mt19937_64 rng(1);
  const auto a = testutil::random_spikes(rng, {2, 3, 4}, 4);
  const auto b = testutil::random_spikes(rng, {1, 3, 4}, 4);
  const auto c = concat_leading(a, b);
  CHECK(c.shape() == Shape{3, 3, 4});
  CHECK(slice_leading(c, 0, 2) == a);
  CHECK(slice_leading(c, 2, 3) == b);
  CHECK_THROWS_AS(concat_leading(a, testutil::random_spikes(rng, {1, 3, 5}, 4)), ShapeError);
}
