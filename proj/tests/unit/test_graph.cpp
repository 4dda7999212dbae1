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

#include <functional>

#include "doctest.h"
#include "helpers.hpp"
#include "spikesot/graph.hpp"

using namespace spikesot;

namespace {

using Fn = std::function<ag::Var(const std::vector<ag::Var>&)>;

// Relative error of tape gradients against central differences for
// L = sum(f(inputs) * w).
double grad_error(const Fn& f, std::vector<DenseTensor> inputs, std::uint64_t seed,
                  double h = 1e-6) {
  std::mt19937_64 rng(seed);
  std::vector<ag::Var> leaves;
  for (auto& in : inputs) leaves.push_back(ag::leaf(in, true));
  ag::Var w;
  ag::Tape tape;
  ag::Var loss;
  {
    ag::TapeScope scope(tape);
    const ag::Var out = f(leaves);
    w = ag::constant(testutil::random_dense(rng, out->value.shape()));
    loss = ag::sum(ag::mul(out, w));
  }
  tape.backward(loss);
  auto value = [&] { return ag::sum(ag::mul(f(leaves), w))->value[0]; };
  double diff = 0, norm = 0;
  for (auto& leaf : leaves)
    for (std::size_t i = 0; i < leaf->value.size(); ++i) {
      const double a = leaf->has_grad() ? leaf->grad[i] : 0.0;
      const double n = ag::numeric_derivative(value, *leaf, i, h);
      diff += (a - n) * (a - n);
      norm = std::max(norm, std::max(a * a, n * n));
    }
  return norm > 0 ? std::sqrt(diff) / std::sqrt(norm) : 0.0;
}

DenseTensor rnd(std::uint64_t seed, const Shape& s, double lo = -1, double hi = 1) {
  std::mt19937_64 rng(seed);
  return testutil::random_dense(rng, s, lo, hi);
}

}  // namespace

TEST_CASE("elementwise and layout gradients") {
  const Shape s{2, 3, 4};
  CHECK(grad_error([](auto& v) { return ag::add(v[0], v[1]); }, {rnd(1, s), rnd(2, s)}, 1) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::sub(v[0], v[1]); }, {rnd(1, s), rnd(2, s)}, 2) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::mul(v[0], v[1]); }, {rnd(1, s), rnd(2, s)}, 3) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::scale(v[0], -2.5); }, {rnd(1, s)}, 4) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::sigmoid(v[0]); }, {rnd(1, s, -3, 3)}, 5) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::reshape(v[0], {6, 4}); }, {rnd(1, s)}, 6) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::sum_time(v[0]); }, {rnd(1, s)}, 7) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::repeat_time(v[0], 3); }, {rnd(1, {1, 3, 4})}, 8) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::slice_time(v[0], 1); }, {rnd(1, s)}, 9) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::concat_time({v[0], v[1]}); }, {rnd(1, s), rnd(2, s)},
                   10) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::gather(v[0], {0, 5, 5, 23}); }, {rnd(1, s)}, 11) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::mean_tokens(v[0]); }, {rnd(1, s)}, 12) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::gate_tokens(v[0], v[1]); },
                   {rnd(1, {2, 1, 4}), rnd(2, s)}, 13) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::channel_scale(v[0], v[1]); }, {rnd(1, {4}), rnd(2, s)},
                   14) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::split_heads(v[0], 2); }, {rnd(1, s)}, 15) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::merge_heads(v[0], 2); }, {rnd(1, {4, 3, 2})}, 16) < 1e-7);
}

TEST_CASE("spatial layout gradients") {
  const Shape s{2, 3, 4, 4};
  CHECK(grad_error([](auto& v) { return ag::to_tokens(v[0]); }, {rnd(1, s)}, 1) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::from_tokens(v[0], 4, 4); }, {rnd(1, {2, 16, 3})}, 2) <
        1e-7);
  CHECK(grad_error([](auto& v) { return ag::avg_pool(v[0], 2, 2); }, {rnd(1, s)}, 3) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::upsample(v[0], 8, 8); }, {rnd(1, s)}, 4) < 1e-7);
}

TEST_CASE("parametric operator gradients") {
  for (auto kind : {ConvKind::pointwise, ConvKind::depthwise, ConvKind::full}) {
    const auto g = ConvGeometry::make(kind, 3, kind == ConvKind::depthwise ? 3 : 2,
                                      kind == ConvKind::pointwise ? 1 : 3, 2);
    CHECK(grad_error(
              [g](auto& v) { return ag::conv2d(v[0], g, v[1], v[2], ExecPath::mac); },
              {rnd(1, {2, 3, 5, 5}), rnd(2, g.weight_shape()), rnd(3, {g.out_channels})}, 1) < 1e-7);
  }
  CHECK(grad_error([](auto& v) { return ag::linear(v[0], v[1], v[2], ExecPath::mac); },
                   {rnd(1, {2, 3, 4}), rnd(2, {5, 4}), rnd(3, {5})}, 2) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::bmm(v[0], v[1]); }, {rnd(1, {2, 3, 4}), rnd(2, {2, 4, 5})},
                   3) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::bmm_tn(v[0], v[1]); },
                   {rnd(1, {2, 4, 3}), rnd(2, {2, 4, 5})}, 4) < 1e-7);
  CHECK(grad_error([](auto& v) { return ag::bmm_nt(v[0], v[1]); },
                   {rnd(1, {2, 3, 4}), rnd(2, {2, 5, 4})}, 5) < 1e-7);
}

TEST_CASE("relaxed spiking gradient") {
  CHECK(grad_error([](auto& v) { return ag::spiking(v[0], v[1], 4, NeuronMode::relaxed); },
                   {rnd(1, {3, 2, 5}, -0.4, 4.4), rnd(2, {3})}, 1) < 1e-6);
}

TEST_CASE("integer spiking passes the straight-through slope") {
  ag::Var x = ag::leaf(DenseTensor({1, 3}, {1.2, 10.0, -0.4}), true);
  ag::Var theta = ag::leaf(DenseTensor({1}, {0.0}), false);
  ag::Tape tape;
  ag::Var loss;
  {
    ag::TapeScope scope(tape);
    loss = ag::sum(ag::spiking(x, theta, 4, NeuronMode::integer));
  }
  tape.backward(loss);
  CHECK(x->grad[0] == 0.25);
  CHECK(x->grad[1] == 0.0);
  CHECK(x->grad[2] == 0.25);
}

TEST_CASE("spike products are computed on integer counts") {
  std::mt19937_64 rng(4);
  const auto a = testutil::random_spikes(rng, {1, 5, 3}, 4);
  const auto b = testutil::random_spikes(rng, {1, 3, 6}, 4);
  const auto out = ag::bmm(ag::spike_constant(a), ag::spike_constant(b))->value;
  for (double v : out.data()) CHECK(v * 16 == std::round(v * 16));
}

TEST_CASE("nodes without trainable ancestors are not recorded") {
  ag::Tape tape;
  ag::TapeScope scope(tape);
  ag::add(ag::constant(DenseTensor({2}, 1.0)), ag::constant(DenseTensor({2}, 2.0)));
  CHECK(tape.size() == 0);
  ag::add(ag::leaf(DenseTensor({2}, 1.0), true), ag::constant(DenseTensor({2}, 2.0)));
  CHECK(tape.size() == 1);
}
