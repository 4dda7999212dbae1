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

#include "spikesot/nnops.hpp"

#include <cmath>
#include <numbers>

namespace spikesot {

void ConvSpec::validate() const {
  geometry.validate();
  require_shape("ConvSpec weights", geometry.weight_shape(), weights.shape());
  if (bias) require_shape("ConvSpec bias", {geometry.out_channels}, bias->shape());
}

void LinearSpec::validate() const {
  require_shape("LinearSpec weights", {out_features, in_features}, weights.shape());
  if (bias) require_shape("LinearSpec bias", {out_features}, bias->shape());
}

void BnFold::validate(std::size_t channels) const {
  require_shape("BnFold scale", {channels}, scale.shape());
  require_shape("BnFold shift", {channels}, shift.shape());
  for (double s : scale.data())
    if (!(s > 0.0)) throw Error("BnFold: scale must be positive per channel");
}

namespace {

template <typename T>
T as_timesteps(const T& x) {
  if (x.rank() == 3) return x.reshaped({1, x.dim(0), x.dim(1), x.dim(2)});
  return x;
}

template <typename T>
DenseTensor restore_rank(const T& x, DenseTensor out) {
  if (x.rank() == 3) return out.reshaped({out.dim(1), out.dim(2), out.dim(3)});
  return out;
}

const DenseTensor* bias_ptr(const std::optional<DenseTensor>& b) { return b ? &*b : nullptr; }

}  // namespace

DenseTensor conv2d(const SpikeTensor& x, const ConvSpec& spec, ExecPath path) {
  spec.validate();
  const SpikeTensor xt = as_timesteps(x);
  DenseTensor out = path == ExecPath::ac
                        ? kernels::conv2d_ac(xt, spec.geometry, spec.weights, bias_ptr(spec.bias))
                        : kernels::conv2d_mac(spike_to_dense(xt), spec.geometry, spec.weights,
                                              bias_ptr(spec.bias));
  return restore_rank(x, std::move(out));
}

DenseTensor conv2d(const DenseTensor& x, const ConvSpec& spec) {
  spec.validate();
  return restore_rank(
      x, kernels::conv2d_mac(as_timesteps(x), spec.geometry, spec.weights, bias_ptr(spec.bias)));
}

DenseTensor linear(const SpikeTensor& x, const LinearSpec& spec, ExecPath path) {
  spec.validate();
  return path == ExecPath::ac
             ? kernels::linear_ac(x, spec.weights, bias_ptr(spec.bias))
             : kernels::linear_mac(spike_to_dense(x), spec.weights, bias_ptr(spec.bias));
}

DenseTensor linear(const DenseTensor& x, const LinearSpec& spec) {
  spec.validate();
  return kernels::linear_mac(x, spec.weights, bias_ptr(spec.bias));
}

DenseTensor apply_affine(const DenseTensor& x, const BnFold& bn) {
  const DenseTensor xt = as_timesteps(x);
  const std::size_t C = xt.dim(1), plane = xt.dim(2) * xt.dim(3);
  bn.validate(C);
  DenseTensor out(xt.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t c = (i / plane) % C;
    out[i] = bn.scale[c] * xt[i] + bn.shift[c];
  }
  return restore_rank(x, std::move(out));
}

ConvSpec fold_batchnorm(const ConvSpec& conv, const BnFold& bn) {
  conv.validate();
  const std::size_t C = conv.geometry.out_channels;
  bn.validate(C);
  ConvSpec out = conv;
  const std::size_t per = conv.weights.size() / C;
  for (std::size_t i = 0; i < out.weights.size(); ++i) out.weights[i] *= bn.scale[i / per];
  DenseTensor bias({C});
  for (std::size_t c = 0; c < C; ++c)
    bias[c] = (conv.bias ? (*conv.bias)[c] : 0.0) * bn.scale[c] + bn.shift[c];
  out.bias = std::move(bias);
  return out;
}

namespace {

struct Planes {
  std::size_t count, h, w;
};

Planes planes_of(const Shape& s, const char* what) {
  if (s.size() < 2) throw Error(std::string(what) + ": need at least two axes");
  return {numel(s) / (s[s.size() - 2] * s.back()), s[s.size() - 2], s.back()};
}

Shape with_hw(Shape s, std::size_t h, std::size_t w) {
  s[s.size() - 2] = h;
  s.back() = w;
  return s;
}

void check_divides(const char* what, std::size_t small_h, std::size_t small_w,
                   std::size_t big_h, std::size_t big_w) {
  if (small_h == 0 || small_w == 0 || big_h % small_h || big_w % small_w)
    throw Error(std::string(what) + ": extents " + std::to_string(small_h) + "x" +
                std::to_string(small_w) + " do not divide " + std::to_string(big_h) + "x" +
                std::to_string(big_w));
}

}  // namespace

DenseTensor avg_pool_to(const DenseTensor& x, std::size_t th, std::size_t tw) {
  const Planes p = planes_of(x.shape(), "avg_pool_to");
  check_divides("avg_pool_to", th, tw, p.h, p.w);
  const std::size_t fy = p.h / th, fx = p.w / tw;
  const double inv = 1.0 / (fy * fx);
  DenseTensor out(with_hw(x.shape(), th, tw));
  for (std::size_t c = 0; c < p.count; ++c)
    for (std::size_t y = 0; y < p.h; ++y)
      for (std::size_t xx = 0; xx < p.w; ++xx)
        out[(c * th + y / fy) * tw + xx / fx] += x[(c * p.h + y) * p.w + xx];
  out *= inv;
  return out;
}

DenseTensor avg_pool_to(const SpikeTensor& x, std::size_t th, std::size_t tw) {
  return avg_pool_to(spike_to_dense(x), th, tw);
}

DenseTensor upsample_from(const DenseTensor& x, std::size_t th, std::size_t tw) {
  const Planes p = planes_of(x.shape(), "upsample_from");
  check_divides("upsample_from", p.h, p.w, th, tw);
  const std::size_t fy = th / p.h, fx = tw / p.w;
  DenseTensor out(with_hw(x.shape(), th, tw));
  for (std::size_t c = 0; c < p.count; ++c)
    for (std::size_t y = 0; y < th; ++y)
      for (std::size_t xx = 0; xx < tw; ++xx)
        out[(c * th + y) * tw + xx] = x[(c * p.h + y / fy) * p.w + xx / fx];
  return out;
}

DenseTensor avg_pool_backward(const DenseTensor& grad_out, const Shape& input_shape) {
  const Planes p = planes_of(input_shape, "avg_pool_backward");
  const Planes q = planes_of(grad_out.shape(), "avg_pool_backward");
  DenseTensor g = upsample_from(grad_out, p.h, p.w);
  g *= 1.0 / ((p.h / q.h) * (p.w / q.w));
  return g;
}

DenseTensor upsample_backward(const DenseTensor& grad_out, const Shape& input_shape) {
  const Planes p = planes_of(input_shape, "upsample_backward");
  const Planes q = planes_of(grad_out.shape(), "upsample_backward");
  DenseTensor g = avg_pool_to(grad_out, p.h, p.w);
  g *= static_cast<double>((q.h / p.h) * (q.w / p.w));
  return g;
}

DenseTensor hanning_2d(std::size_t n) {
  if (n == 0) throw Error("hanning_2d: n must be >= 1");
  std::vector<double> w(n, 1.0);
  if (n > 1)
    for (std::size_t k = 0; k < n; ++k)
      w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / (n - 1));
  DenseTensor out({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = w[i] * w[j];
  return out;
}

}  // namespace spikesot
