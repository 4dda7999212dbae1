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
#include "spikesot/backbone.hpp"

using namespace spikesot;
using testutil::max_diff;

namespace {

BackboneConfig small_backbone() {
  BackboneConfig c;
  c.channels = {8, 8, 16, 16};
  c.depths = {1, 1, 2, 1};
  c.mlp_ratio = 2;
  c.input_size = 64;
  return c;
}

struct Net {
  ParamStore store;
  Initializer init;
  Backbone net;
  Net(const BackboneConfig& c, std::uint64_t seed) : init(seed) {
    ParamBuilder pb(store, init);
    net = Backbone::make(pb, c);
  }
};

DenseTensor timestep(const DenseTensor& x, std::size_t t) {
  const std::size_t plane = x.size() / x.dim(0);
  Shape s = x.shape();
  s[0] = 1;
  return DenseTensor(s, std::vector<double>(x.data().begin() + t * plane,
                                            x.data().begin() + (t + 1) * plane));
}

}  // namespace

TEST_CASE("tap ids and extents for a 64 pixel input") {
  const auto geo = tap_geometry(small_backbone());
  REQUIRE(geo.size() == 5);
  const std::vector<std::string> ids{"ds2", "ds3", "stage3_mid", "ds4", "stage4_final"};
  const std::vector<std::size_t> ext{16, 8, 8, 4, 4}, ch{8, 16, 16, 16, 16};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(geo[i].layer_id == ids[i]);
    CHECK(geo[i].extent == ext[i]);
    CHECK(geo[i].channels == ch[i]);
  }
  CHECK(tap_ids() == ids);
}

TEST_CASE("forward produces the advertised tap shapes") {
  Net n(small_backbone(), 1);
  std::mt19937_64 rng(2);
  const auto taps = template_forward(n.net, testutil::random_dense(rng, {1, 3, 64, 64}, 0, 1));
  const auto geo = tap_geometry(small_backbone());
  REQUIRE(taps.size() == geo.size());
  for (std::size_t i = 0; i < taps.size(); ++i) {
    CHECK(taps[i].index == i);
    CHECK(taps[i].tensor->value.shape() ==
          Shape{1, geo[i].channels, geo[i].extent, geo[i].extent});
  }
}

TEST_CASE("input side must be divisible by the stride") {
  BackboneConfig c = small_backbone();
  c.input_size = 72;
  CHECK_THROWS(c.validate());
  c.input_size = 80;
  CHECK_NOTHROW(c.validate());
  c.extra_stage = true;
  CHECK_THROWS(c.validate());
}

TEST_CASE("zero image gives all-zero taps") {
  Net n(small_backbone(), 3);
  for (const auto& t : template_forward(n.net, DenseTensor({1, 3, 64, 64})))
    CHECK(t.tensor->value.all_zero());
}

TEST_CASE("with zero decay each template timestep is independent") {
  BackboneConfig c1 = small_backbone();
  c1.fixed_beta = 0.0;
  BackboneConfig c3 = c1;
  c3.template_timesteps = 3;
  Net n1(c1, 4), n3(c3, 4);
  std::mt19937_64 rng(5);
  const DenseTensor img = testutil::random_dense(rng, {1, 3, 64, 64}, 0, 1);
  const auto one = template_forward(n1.net, img);
  const auto three = template_forward(n3.net, stack_frames({timestep(img, 0).reshaped({3, 64, 64}),
                                                            timestep(img, 0).reshaped({3, 64, 64}),
                                                            timestep(img, 0).reshaped({3, 64, 64})}));
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i)
    for (std::size_t t = 0; t < 3; ++t)
      CHECK(max_diff(timestep(three[i].tensor->value, t), one[i].tensor->value) == 0.0);
}

TEST_CASE("forward is deterministic and both paths agree") {
  Net n(small_backbone(), 6);
  std::mt19937_64 rng(7);
  const DenseTensor img = testutil::random_dense(rng, {1, 3, 64, 64}, 0, 1);
  const auto a = template_forward(n.net, img);
  const auto b = template_forward(n.net, img);
  const auto m = template_forward(n.net, img, Exec{ExecPath::mac, NeuronMode::integer});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(max_diff(a[i].tensor->value, b[i].tensor->value) == 0.0);
    CHECK(max_diff(a[i].tensor->value, m[i].tensor->value) <= 1e-9);
  }
}
