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
#include "spikesot/attention.hpp"

using namespace spikesot;
using testutil::max_diff;

TEST_CASE("single token: both orders agree") {
  std::mt19937_64 rng(1);
  const auto q = ag::spike_constant(testutil::random_spikes(rng, {1, 1, 4}, 4));
  const auto k = ag::spike_constant(testutil::random_spikes(rng, {1, 1, 4}, 4));
  const auto v = ag::spike_constant(testutil::random_spikes(rng, {1, 1, 8}, 4));
  CHECK(max_diff(attention_product(q, k, v, AttentionOrder::quadratic, 0.5)->value,
                 attention_product(q, k, v, AttentionOrder::linear, 0.5)->value) <= 1e-12);
}

TEST_CASE("zero spikes give zero attention") {
  const auto z = ag::spike_constant(SpikeTensor({1, 5, 4}, 4));
  const auto out = attention_product(z, z, z, AttentionOrder::linear, 1.0)->value;
  CHECK(out.all_zero());
}

TEST_CASE("product against an explicit triple sum") {
  std::mt19937_64 rng(2);
  const std::size_t N = 6, C = 4, Cv = 8;
  const auto qs = testutil::random_spikes(rng, {1, N, C}, 4);
  const auto ks = testutil::random_spikes(rng, {1, N, C}, 4);
  const auto vs = testutil::random_spikes(rng, {1, N, Cv}, 4);
  const double scale = 0.5;
  DenseTensor expect({1, N, Cv});
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t c = 0; c < Cv; ++c) {
      double s = 0;
      for (std::size_t j = 0; j < N; ++j)
        for (std::size_t d = 0; d < C; ++d) s += qs.value(i * C + d) * ks.value(j * C + d) * vs.value(j * Cv + c);
      expect[i * Cv + c] = scale * s;
    }
  for (auto order : {AttentionOrder::quadratic, AttentionOrder::linear})
    CHECK(max_diff(attention_product(ag::spike_constant(qs), ag::spike_constant(ks),
                                     ag::spike_constant(vs), order, scale)->value,
                   expect) <= 1e-9);
}

TEST_CASE("multi-head product is per channel group") {
  std::mt19937_64 rng(3);
  const auto qs = testutil::random_spikes(rng, {2, 5, 4}, 4);
  const auto ks = testutil::random_spikes(rng, {2, 5, 4}, 4);
  const auto vs = testutil::random_spikes(rng, {2, 5, 6}, 4);
  const auto out = attention_product(ag::spike_constant(qs), ag::spike_constant(ks),
                                     ag::spike_constant(vs), AttentionOrder::linear, 1.0, 2)->value;
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t c = 0; c < 6; ++c) {
        const std::size_t hd = c / 3;
        double s = 0;
        for (std::size_t j = 0; j < 5; ++j)
          for (std::size_t d = 0; d < 2; ++d)
            s += qs.value((t * 5 + i) * 4 + hd * 2 + d) * ks.value((t * 5 + j) * 4 + hd * 2 + d) *
                 vs.value((t * 5 + j) * 6 + c);
        CHECK(out[(t * 5 + i) * 6 + c] == doctest::Approx(s));
      }
}

TEST_CASE("key-value memory") {
  CHECK(kv_memory(SpikeTensor({3, 2}, 4), SpikeTensor({3, 2}, 4)).all_zero());
  const auto m = kv_memory(SpikeTensor({1, 2}, {1, 0}, 1), SpikeTensor({1, 2}, {0, 1}, 1));
  CHECK(m == DenseTensor({2, 2}, {0, 1, 0, 0}));

  std::mt19937_64 rng(4);
  const auto k = testutil::random_spikes(rng, {5, 3}, 4);
  const auto v = testutil::random_spikes(rng, {5, 2}, 4);
  DenseTensor sum({3, 2});
  for (std::size_t n = 0; n < 5; ++n)
    sum += kv_memory(slice_leading(k, n, n + 1), slice_leading(v, n, n + 1));
  CHECK(max_diff(kv_memory(k, v), sum) <= 1e-12);
  // Rank 3 sums over time.
  const auto k3 = testutil::random_spikes(rng, {2, 4, 3}, 4);
  const auto v3 = testutil::random_spikes(rng, {2, 4, 2}, 4);
  CHECK(max_diff(kv_memory(k3, v3), kv_memory(k3.reshaped({8, 3}), v3.reshaped({8, 2}))) <= 1e-12);
}

TEST_CASE("spike-driven self-attention block") {
  ParamStore store;
  Initializer init(5);
  ParamBuilder pb(store, init);
  NeuronConfig nc;
  nc.timesteps = 2;
  const auto spec = EsdsaSpec::make(pb, "attn", 8, 2.0, 2, nc, 2.0);
  CHECK(spec.value_width() == 16);
  CHECK(spec.effective_scale() == doctest::Approx(1.0 / std::sqrt(8.0)));
  std::mt19937_64 rng(6);
  const auto u = testutil::random_spikes(rng, {2, 10, 8}, 4);
  const auto a = esdsa_forward(u, spec, AttentionOrder::quadratic);
  const auto b = esdsa_forward(u, spec, AttentionOrder::linear);
  CHECK(a.shape() == Shape{2, 10, 8});
  CHECK(max_diff(a, b) <= 1e-9);
  CHECK_THROWS_AS(esdsa_forward(testutil::random_spikes(rng, {2, 10, 6}, 4), spec,
                                AttentionOrder::linear),
                  ShapeError);
}

TEST_CASE("split and merge heads are inverse") {
  std::mt19937_64 rng(7);
  const auto x = ag::constant(testutil::random_dense(rng, {2, 5, 6}));
  const auto s = ag::split_heads(x, 3);
  CHECK(s->value.shape() == Shape{6, 5, 2});
  CHECK(ag::merge_heads(s, 3)->value == x->value);
}
