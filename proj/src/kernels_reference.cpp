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

#include "spikesot/kernels.hpp"

namespace spikesot::reference {

// Plain definition-order loops. Deliberately unoptimized: these are the
// oracles the OpenMP kernels are tested and benchmarked against.

DenseTensor conv2d(const DenseTensor& x, const ConvGeometry& g, const DenseTensor& w,
                   const DenseTensor* bias) {
  g.validate();
  require_shape("reference::conv2d weights", g.weight_shape(), w.shape());
  if (x.rank() != 4 || x.dim(1) != g.in_channels)
    throw ShapeError("reference::conv2d input", {0, g.in_channels, 0, 0}, x.shape());
  const std::size_t T = x.dim(0), H = x.dim(2), W = x.dim(3);
  const std::size_t Ho = g.out_extent(H), Wo = g.out_extent(W);
  const std::size_t ipg = g.in_per_group(), opg = g.out_per_group(), K = g.kernel;
  DenseTensor out({T, g.out_channels, Ho, Wo});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t co = 0; co < g.out_channels; ++co)
      for (std::size_t oy = 0; oy < Ho; ++oy)
        for (std::size_t ox = 0; ox < Wo; ++ox) {
          double acc = bias ? (*bias)[co] : 0.0;
          for (std::size_t cig = 0; cig < ipg; ++cig) {
            const std::size_t ci = (co / opg) * ipg + cig;
            for (std::size_t ky = 0; ky < K; ++ky)
              for (std::size_t kx = 0; kx < K; ++kx) {
                const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.padding);
                const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.padding);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(H) || ix >= static_cast<long>(W))
                  continue;
                acc += w[((co * ipg + cig) * K + ky) * K + kx] *
                       x[((t * g.in_channels + ci) * H + iy) * W + ix];
              }
          }
          out[((t * g.out_channels + co) * Ho + oy) * Wo + ox] = acc;
        }
  return out;
}

DenseTensor conv2d_ac(const SpikeTensor& x, const ConvGeometry& g, const DenseTensor& w,
                      const DenseTensor* bias) {
  g.validate();
  require_shape("reference::conv2d_ac weights", g.weight_shape(), w.shape());
  const std::size_t T = x.dim(0), H = x.dim(2), W = x.dim(3);
  const std::size_t Ho = g.out_extent(H), Wo = g.out_extent(W);
  const std::size_t ipg = g.in_per_group(), opg = g.out_per_group(), K = g.kernel;
  DenseTensor acc({T, g.out_channels, Ho, Wo});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t ci = 0; ci < g.in_channels; ++ci)
      for (std::size_t iy = 0; iy < H; ++iy)
        for (std::size_t ix = 0; ix < W; ++ix) {
          const auto c = x.counts()[((t * g.in_channels + ci) * H + iy) * W + ix];
          if (!c) continue;
          const std::size_t group = ci / ipg;
          for (std::size_t co = group * opg; co < (group + 1) * opg; ++co)
            for (std::size_t ky = 0; ky < K; ++ky)
              for (std::size_t kx = 0; kx < K; ++kx) {
                const long ny = static_cast<long>(iy + g.padding) - static_cast<long>(ky);
                const long nx = static_cast<long>(ix + g.padding) - static_cast<long>(kx);
                if (ny < 0 || nx < 0 || ny % g.stride || nx % g.stride) continue;
                const std::size_t oy = ny / g.stride, ox = nx / g.stride;
                if (oy >= Ho || ox >= Wo) continue;
                acc[((t * g.out_channels + co) * Ho + oy) * Wo + ox] +=
                    c * w[((co * ipg + ci % ipg) * K + ky) * K + kx];
              }
        }
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const std::size_t co = (i / (Ho * Wo)) % g.out_channels;
    acc[i] = (bias ? (*bias)[co] : 0.0) + acc[i] / x.d_cap();
  }
  return acc;
}

DenseTensor linear(const DenseTensor& x, const DenseTensor& w, const DenseTensor* bias) {
  const std::size_t in = w.dim(1), outf = w.dim(0);
  if (x.rank() == 0 || x.shape().back() != in)
    throw ShapeError("reference::linear input", {in}, x.shape());
  Shape shape = x.shape();
  shape.back() = outf;
  DenseTensor out(shape);
  const std::size_t rows = x.size() / in;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t o = 0; o < outf; ++o) {
      double acc = bias ? (*bias)[o] : 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * x[r * in + i];
      out[r * outf + o] = acc;
    }
  return out;
}

DenseTensor linear_ac(const SpikeTensor& x, const DenseTensor& w, const DenseTensor* bias) {
  const std::size_t in = w.dim(1), outf = w.dim(0);
  Shape shape = x.shape();
  shape.back() = outf;
  DenseTensor out(shape);
  const std::size_t rows = x.size() / in;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < in; ++i) {
      const auto c = x.counts()[r * in + i];
      for (std::int32_t k = 0; k < c; ++k)  // one addition per unit spike
        for (std::size_t o = 0; o < outf; ++o) out[r * outf + o] += w[o * in + i];
    }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t o = 0; o < outf; ++o)
      out[r * outf + o] = (bias ? (*bias)[o] : 0.0) + out[r * outf + o] / x.d_cap();
  return out;
}

DenseTensor bmm(const DenseTensor& a, const DenseTensor& b) {
  const std::size_t B = a.dim(0), N = a.dim(1), K = a.dim(2), M = b.dim(2);
  if (b.dim(0) != B || b.dim(1) != K) throw ShapeError("reference::bmm", a.shape(), b.shape());
  DenseTensor out({B, N, M});
  for (std::size_t bi = 0; bi < B; ++bi)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t m = 0; m < M; ++m) {
        double acc = 0.0;
        for (std::size_t k = 0; k < K; ++k) acc += a[(bi * N + n) * K + k] * b[(bi * K + k) * M + m];
        out[(bi * N + n) * M + m] = acc;
      }
  return out;
}

}  // namespace spikesot::reference
