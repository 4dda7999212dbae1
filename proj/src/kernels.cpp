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

#include <algorithm>
#include <atomic>
#include <cstddef>

namespace spikesot {

using Index = std::ptrdiff_t;

std::size_t ConvGeometry::out_extent(std::size_t in) const {
  const Index span = static_cast<Index>(in) + 2 * static_cast<Index>(padding) -
                     static_cast<Index>(kernel);
  if (span < 0 || stride == 0)
    throw Error("conv: input extent " + std::to_string(in) + " too small for kernel " +
                std::to_string(kernel) + " with padding " + std::to_string(padding));
  return static_cast<std::size_t>(span) / stride + 1;
}

void ConvGeometry::validate() const {
  if (kernel == 0 || stride == 0 || in_channels == 0 || out_channels == 0)
    throw Error("conv: kernel, stride and channel counts must be positive");
  if (kind == ConvKind::depthwise && out_channels != in_channels)
    throw Error("conv: depthwise requires out_channels == in_channels (" +
                std::to_string(out_channels) + " vs " + std::to_string(in_channels) + ")");
  if (kind == ConvKind::pointwise && kernel != 1)
    throw Error("conv: pointwise requires a 1x1 kernel");
}

ConvGeometry ConvGeometry::make(ConvKind kind, std::size_t in_ch, std::size_t out_ch,
                                std::size_t kernel, std::size_t stride) {
  ConvGeometry g{kind, kernel, stride, kernel / 2, in_ch, out_ch};
  g.validate();
  return g;
}

std::uint64_t conv_macs(const ConvGeometry& g, std::size_t in_h, std::size_t in_w) {
  return static_cast<std::uint64_t>(g.kernel) * g.kernel * g.in_per_group() *
         g.out_channels * g.out_extent(in_h) * g.out_extent(in_w);
}

namespace {

void check_conv_input(const Shape& x, const ConvGeometry& g, const DenseTensor& w) {
  g.validate();
  if (x.size() != 4 || x[1] != g.in_channels)
    throw ShapeError("conv2d input", {x.empty() ? 0 : x[0], g.in_channels, 0, 0}, x);
  require_shape("conv2d weights", g.weight_shape(), w.shape());
}

void check_bias(const DenseTensor* bias, std::size_t n, const char* what) {
  if (bias) require_shape(what, {n}, bias->shape());
}

/// Output columns ox for which ox * stride + offset lands inside [0, width).
struct ColumnRange {
  Index lo, hi;
};

ColumnRange columns(Index offset, Index stride, Index width, Index out_width) {
  Index lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  Index hi = (width - 1 - offset) >= 0 ? (width - 1 - offset) / stride + 1 : 0;
  return {lo, std::min(hi, out_width)};
}

std::atomic<std::uint64_t> g_matmul_macs{0};

}  // namespace

namespace kernels {

std::uint64_t matmul_mac_count() { return g_matmul_macs.load(); }
void reset_matmul_mac_count() { g_matmul_macs.store(0); }

DenseTensor conv2d_mac(const DenseTensor& x, const ConvGeometry& g, const DenseTensor& w,
                       const DenseTensor* bias) {
  check_conv_input(x.shape(), g, w);
  check_bias(bias, g.out_channels, "conv2d bias");
  const Index T = x.dim(0), C = g.in_channels, H = x.dim(2), W = x.dim(3);
  const Index Ho = g.out_extent(H), Wo = g.out_extent(W);
  const Index Co = g.out_channels, K = g.kernel, S = g.stride, P = g.padding;
  const Index ipg = g.in_per_group(), opg = g.out_per_group();
  DenseTensor out({static_cast<std::size_t>(T), g.out_channels, static_cast<std::size_t>(Ho),
                   static_cast<std::size_t>(Wo)});
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  double* od = out.data().data();

#pragma omp parallel for collapse(2) schedule(static)
  for (Index t = 0; t < T; ++t) {
    for (Index co = 0; co < Co; ++co) {
      double* o = od + (t * Co + co) * Ho * Wo;
      if (bias) std::fill(o, o + Ho * Wo, (*bias)[co]);
      const Index group = co / opg;
      for (Index cig = 0; cig < ipg; ++cig) {
        const double* xp = xd + (t * C + group * ipg + cig) * H * W;
        for (Index ky = 0; ky < K; ++ky) {
          for (Index kx = 0; kx < K; ++kx) {
            const double wv = wd[((co * ipg + cig) * K + ky) * K + kx];
            if (wv == 0.0) continue;
            const ColumnRange cr = columns(kx - P, S, W, Wo);
            for (Index oy = 0; oy < Ho; ++oy) {
              const Index iy = oy * S + ky - P;
              if (iy < 0 || iy >= H) continue;
              const double* xr = xp + iy * W;
              double* orow = o + oy * Wo;
              for (Index ox = cr.lo; ox < cr.hi; ++ox) orow[ox] += wv * xr[ox * S + kx - P];
            }
          }
        }
      }
    }
  }
  return out;
}

DenseTensor conv2d_ac(const SpikeTensor& x, const ConvGeometry& g, const DenseTensor& w,
                      const DenseTensor* bias) {
  check_conv_input(x.shape(), g, w);
  check_bias(bias, g.out_channels, "conv2d bias");
  const Index T = x.dim(0), C = g.in_channels, H = x.dim(2), W = x.dim(3);
  const Index Ho = g.out_extent(H), Wo = g.out_extent(W);
  const Index Co = g.out_channels, K = g.kernel, S = g.stride, P = g.padding;
  const Index ipg = g.in_per_group(), opg = g.out_per_group();
  const double inv_d = 1.0 / x.d_cap();

  // Nonzero events per input plane.
  struct Event {
    Index y, x;
    std::int32_t count;
  };
  std::vector<std::vector<Event>> events(T * C);
  const auto counts = x.counts();
  for (Index p = 0; p < T * C; ++p) {
    for (Index i = 0; i < H * W; ++i) {
      const auto c = counts[p * H * W + i];
      if (c) events[p].push_back({i / W, i % W, c});
    }
  }

  DenseTensor out({static_cast<std::size_t>(T), g.out_channels, static_cast<std::size_t>(Ho),
                   static_cast<std::size_t>(Wo)});
  const double* wd = w.data().data();
  double* od = out.data().data();

#pragma omp parallel for collapse(2) schedule(static)
  for (Index t = 0; t < T; ++t) {
    for (Index co = 0; co < Co; ++co) {
      double* o = od + (t * Co + co) * Ho * Wo;
      const Index group = co / opg;
      for (Index cig = 0; cig < ipg; ++cig) {
        const double* wk = wd + (co * ipg + cig) * K * K;
        for (const Event& e : events[t * C + group * ipg + cig]) {
          for (Index ky = 0; ky < K; ++ky) {
            const Index ny = e.y + P - ky;
            if (ny < 0 || ny % S) continue;
            const Index oy = ny / S;
            if (oy >= Ho) continue;
            for (Index kx = 0; kx < K; ++kx) {
              const Index nx = e.x + P - kx;
              if (nx < 0 || nx % S) continue;
              const Index ox = nx / S;
              if (ox >= Wo) continue;
              o[oy * Wo + ox] += e.count * wk[ky * K + kx];
            }
          }
        }
      }
      const double b = bias ? (*bias)[co] : 0.0;
      for (Index i = 0; i < Ho * Wo; ++i) o[i] = b + o[i] * inv_d;
    }
  }
  return out;
}

void conv2d_backward(const DenseTensor& x, const ConvGeometry& g, const DenseTensor& w,
                     const DenseTensor& grad_out, DenseTensor* grad_x, DenseTensor* grad_w,
                     DenseTensor* grad_b) {
  check_conv_input(x.shape(), g, w);
  const Index T = x.dim(0), C = g.in_channels, H = x.dim(2), W = x.dim(3);
  const Index Ho = g.out_extent(H), Wo = g.out_extent(W);
  const Index Co = g.out_channels, K = g.kernel, S = g.stride, P = g.padding;
  const Index ipg = g.in_per_group(), opg = g.out_per_group();
  require_shape("conv2d_backward grad",
                {static_cast<std::size_t>(T), g.out_channels, static_cast<std::size_t>(Ho),
                 static_cast<std::size_t>(Wo)},
                grad_out.shape());
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  const double* gd = grad_out.data().data();

  if (grad_b) {
    *grad_b = DenseTensor({g.out_channels});
    for (Index t = 0; t < T; ++t)
      for (Index co = 0; co < Co; ++co) {
        const double* go = gd + (t * Co + co) * Ho * Wo;
        double acc = 0.0;
        for (Index i = 0; i < Ho * Wo; ++i) acc += go[i];
        (*grad_b)[co] += acc;
      }
  }

  if (grad_w) {
    *grad_w = DenseTensor(g.weight_shape());
    double* gw = grad_w->data().data();
#pragma omp parallel for schedule(static)
    for (Index co = 0; co < Co; ++co) {
      const Index group = co / opg;
      for (Index cig = 0; cig < ipg; ++cig) {
        for (Index ky = 0; ky < K; ++ky) {
          for (Index kx = 0; kx < K; ++kx) {
            const ColumnRange cr = columns(kx - P, S, W, Wo);
            double acc = 0.0;
            for (Index t = 0; t < T; ++t) {
              const double* xp = xd + (t * C + group * ipg + cig) * H * W;
              const double* go = gd + (t * Co + co) * Ho * Wo;
              for (Index oy = 0; oy < Ho; ++oy) {
                const Index iy = oy * S + ky - P;
                if (iy < 0 || iy >= H) continue;
                const double* xr = xp + iy * W;
                const double* gr = go + oy * Wo;
                for (Index ox = cr.lo; ox < cr.hi; ++ox) acc += gr[ox] * xr[ox * S + kx - P];
              }
            }
            gw[((co * ipg + cig) * K + ky) * K + kx] = acc;
          }
        }
      }
    }
  }

  if (grad_x) {
    *grad_x = DenseTensor(x.shape());
    double* gx = grad_x->data().data();
#pragma omp parallel for collapse(2) schedule(static)
    for (Index t = 0; t < T; ++t) {
      for (Index ci = 0; ci < C; ++ci) {
        const Index group = ci / ipg;
        const Index cig = ci % ipg;
        double* gp = gx + (t * C + ci) * H * W;
        for (Index co = group * opg; co < (group + 1) * opg; ++co) {
          const double* go = gd + (t * Co + co) * Ho * Wo;
          for (Index ky = 0; ky < K; ++ky) {
            for (Index kx = 0; kx < K; ++kx) {
              const double wv = wd[((co * ipg + cig) * K + ky) * K + kx];
              if (wv == 0.0) continue;
              const ColumnRange cr = columns(kx - P, S, W, Wo);
              for (Index oy = 0; oy < Ho; ++oy) {
                const Index iy = oy * S + ky - P;
                if (iy < 0 || iy >= H) continue;
                double* xr = gp + iy * W;
                const double* gr = go + oy * Wo;
                for (Index ox = cr.lo; ox < cr.hi; ++ox) xr[ox * S + kx - P] += wv * gr[ox];
              }
            }
          }
        }
      }
    }
  }
}

namespace {

void check_linear(const Shape& x, const DenseTensor& w, const DenseTensor* bias) {
  if (w.rank() != 2) throw Error("linear: weights must be [out, in], got " + to_string(w.shape()));
  if (x.empty() || x.back() != w.dim(1)) {
    Shape expected = x;
    if (expected.empty()) expected.push_back(0);
    expected.back() = w.dim(1);
    throw ShapeError("linear input", expected, x);
  }
  check_bias(bias, w.dim(0), "linear bias");
}

Shape linear_out_shape(Shape x, std::size_t out) {
  x.back() = out;
  return x;
}

}  // namespace

DenseTensor linear_mac(const DenseTensor& x, const DenseTensor& w, const DenseTensor* bias) {
  check_linear(x.shape(), w, bias);
  const Index in = w.dim(1), outf = w.dim(0);
  const Index rows = x.size() / in;
  DenseTensor out(linear_out_shape(x.shape(), outf));
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  double* od = out.data().data();
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) {
    const double* xr = xd + r * in;
    for (Index o = 0; o < outf; ++o) {
      const double* wr = wd + o * in;
      double acc = bias ? (*bias)[o] : 0.0;
      for (Index i = 0; i < in; ++i) acc += xr[i] * wr[i];
      od[r * outf + o] = acc;
    }
  }
  return out;
}

DenseTensor linear_ac(const SpikeTensor& x, const DenseTensor& w, const DenseTensor* bias) {
  check_linear(x.shape(), w, bias);
  const Index in = w.dim(1), outf = w.dim(0);
  const Index rows = x.size() / in;
  const double inv_d = 1.0 / x.d_cap();
  DenseTensor out(linear_out_shape(x.shape(), outf));
  const auto counts = x.counts();
  const double* wd = w.data().data();
  double* od = out.data().data();
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) {
    std::vector<std::pair<Index, std::int32_t>> events;
    for (Index i = 0; i < in; ++i)
      if (const auto c = counts[r * in + i]) events.emplace_back(i, c);
    for (Index o = 0; o < outf; ++o) {
      const double* wr = wd + o * in;
      double acc = 0.0;
      for (const auto& [i, c] : events) acc += c * wr[i];
      od[r * outf + o] = (bias ? (*bias)[o] : 0.0) + acc * inv_d;
    }
  }
  return out;
}

void linear_backward(const DenseTensor& x, const DenseTensor& w, const DenseTensor& grad_out,
                     DenseTensor* grad_x, DenseTensor* grad_w, DenseTensor* grad_b) {
  check_linear(x.shape(), w, nullptr);
  const Index in = w.dim(1), outf = w.dim(0);
  const Index rows = x.size() / in;
  require_shape("linear_backward grad", linear_out_shape(x.shape(), outf), grad_out.shape());
  const double* xd = x.data().data();
  const double* wd = w.data().data();
  const double* gd = grad_out.data().data();
  if (grad_x) {
    *grad_x = DenseTensor(x.shape());
    double* gx = grad_x->data().data();
#pragma omp parallel for schedule(static)
    for (Index r = 0; r < rows; ++r) {
      double* gxr = gx + r * in;
      for (Index o = 0; o < outf; ++o) {
        const double g = gd[r * outf + o];
        if (g == 0.0) continue;
        const double* wr = wd + o * in;
        for (Index i = 0; i < in; ++i) gxr[i] += g * wr[i];
      }
    }
  }
  if (grad_w) {
    *grad_w = DenseTensor(w.shape());
    double* gw = grad_w->data().data();
#pragma omp parallel for schedule(static)
    for (Index o = 0; o < outf; ++o) {
      double* gwr = gw + o * in;
      for (Index r = 0; r < rows; ++r) {
        const double g = gd[r * outf + o];
        if (g == 0.0) continue;
        const double* xr = xd + r * in;
        for (Index i = 0; i < in; ++i) gwr[i] += g * xr[i];
      }
    }
  }
  if (grad_b) {
    *grad_b = DenseTensor({static_cast<std::size_t>(outf)});
    for (Index r = 0; r < rows; ++r)
      for (Index o = 0; o < outf; ++o) (*grad_b)[o] += gd[r * outf + o];
  }
}

namespace {

void check_batched(const char* what, const DenseTensor& a, const DenseTensor& b,
                   std::size_t a_axis, std::size_t b_axis) {
  if (a.rank() != 3 || b.rank() != 3 || a.dim(0) != b.dim(0) || a.dim(a_axis) != b.dim(b_axis))
    throw ShapeError(what, a.shape(), b.shape());
}

}  // namespace

DenseTensor bmm(const DenseTensor& a, const DenseTensor& b) {
  check_batched("bmm", a, b, 2, 1);
  const Index B = a.dim(0), N = a.dim(1), K = a.dim(2), M = b.dim(2);
  DenseTensor out({a.dim(0), a.dim(1), b.dim(2)});
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.data().data();
#pragma omp parallel for collapse(2) schedule(static)
  for (Index bi = 0; bi < B; ++bi) {
    for (Index n = 0; n < N; ++n) {
      double* orow = od + (bi * N + n) * M;
      const double* arow = ad + (bi * N + n) * K;
      for (Index k = 0; k < K; ++k) {
        const double av = arow[k];
        if (av == 0.0) continue;
        const double* brow = bd + (bi * K + k) * M;
        for (Index m = 0; m < M; ++m) orow[m] += av * brow[m];
      }
    }
  }
  g_matmul_macs += static_cast<std::uint64_t>(B * N * K * M);
  return out;
}

DenseTensor bmm_tn(const DenseTensor& a, const DenseTensor& b) {
  check_batched("bmm_tn", a, b, 1, 1);
  const Index B = a.dim(0), K = a.dim(1), N = a.dim(2), M = b.dim(2);
  DenseTensor out({a.dim(0), a.dim(2), b.dim(2)});
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.data().data();
#pragma omp parallel for collapse(2) schedule(static)
  for (Index bi = 0; bi < B; ++bi) {
    for (Index n = 0; n < N; ++n) {
      double* orow = od + (bi * N + n) * M;
      for (Index k = 0; k < K; ++k) {
        const double av = ad[(bi * K + k) * N + n];
        if (av == 0.0) continue;
        const double* brow = bd + (bi * K + k) * M;
        for (Index m = 0; m < M; ++m) orow[m] += av * brow[m];
      }
    }
  }
  g_matmul_macs += static_cast<std::uint64_t>(B * N * K * M);
  return out;
}

DenseTensor bmm_nt(const DenseTensor& a, const DenseTensor& b) {
  check_batched("bmm_nt", a, b, 2, 2);
  const Index B = a.dim(0), N = a.dim(1), K = a.dim(2), M = b.dim(1);
  DenseTensor out({a.dim(0), a.dim(1), b.dim(1)});
  const double* ad = a.data().data();
  const double* bd = b.data().data();
  double* od = out.data().data();
#pragma omp parallel for collapse(2) schedule(static)
  for (Index bi = 0; bi < B; ++bi) {
    for (Index n = 0; n < N; ++n) {
      const double* arow = ad + (bi * N + n) * K;
      for (Index m = 0; m < M; ++m) {
        const double* brow = bd + (bi * M + m) * K;
        double acc = 0.0;
        for (Index k = 0; k < K; ++k) acc += arow[k] * brow[k];
        od[(bi * N + n) * M + m] = acc;
      }
    }
  }
  g_matmul_macs += static_cast<std::uint64_t>(B * N * K * M);
  return out;
}

}  // namespace kernels

}  // namespace spikesot
