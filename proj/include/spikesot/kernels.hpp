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

#pragma once

// Compute kernels shared by inference and training. The default namespace
// holds the OpenMP versions; `reference` holds plain serial loops kept as
// the test oracle and benchmark baseline.

#include <cstdint>

#include "spikesot/tensor.hpp"

namespace spikesot {

enum class ConvKind { pointwise, depthwise, full };

struct ConvGeometry {
  ConvKind kind = ConvKind::full;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;

  std::size_t groups() const { return kind == ConvKind::depthwise ? in_channels : 1; }
  std::size_t in_per_group() const { return in_channels / groups(); }
  std::size_t out_per_group() const { return out_channels / groups(); }
  Shape weight_shape() const { return {out_channels, in_per_group(), kernel, kernel}; }
  /// Throws when the extent would be non-positive.
  std::size_t out_extent(std::size_t in) const;
  void validate() const;

  /// "Same" padding for odd kernels.
  static ConvGeometry make(ConvKind kind, std::size_t in_ch, std::size_t out_ch,
                           std::size_t kernel, std::size_t stride = 1);
};

/// Multiply-accumulate count of one timestep of a convolution.
std::uint64_t conv_macs(const ConvGeometry& g, std::size_t in_h, std::size_t in_w);

namespace kernels {

/// Running total of multiply-accumulates issued by the batched matrix
/// products. Tests read it to check complexity contracts.
std::uint64_t matmul_mac_count();
void reset_matmul_mac_count();

// Convolution. x: [T, C_in, H, W], w: [C_out, C_in/groups, K, K],
// result: [T, C_out, H_out, W_out]. bias may be null.
DenseTensor conv2d_mac(const DenseTensor& x, const ConvGeometry& g, const DenseTensor& w,
                       const DenseTensor* bias);
/// Event-driven: each nonzero count c scatters c * weight into the outputs it
/// reaches; the integer-scaled sum is divided by d_cap once at the end.
DenseTensor conv2d_ac(const SpikeTensor& x, const ConvGeometry& g, const DenseTensor& w,
                      const DenseTensor* bias);
void conv2d_backward(const DenseTensor& x, const ConvGeometry& g, const DenseTensor& w,
                     const DenseTensor& grad_out, DenseTensor* grad_x, DenseTensor* grad_w,
                     DenseTensor* grad_b);

// Linear over the last axis. x: [..., in], w: [out, in], result: [..., out].
DenseTensor linear_mac(const DenseTensor& x, const DenseTensor& w, const DenseTensor* bias);
DenseTensor linear_ac(const SpikeTensor& x, const DenseTensor& w, const DenseTensor* bias);
void linear_backward(const DenseTensor& x, const DenseTensor& w, const DenseTensor& grad_out,
                     DenseTensor* grad_x, DenseTensor* grad_w, DenseTensor* grad_b);

// Batched products over a leading batch axis.
// bmm:    [B, N, K] x [B, K, M] -> [B, N, M]
// bmm_tn: [B, K, N]^T x [B, K, M] -> [B, N, M]
// bmm_nt: [B, N, K] x [B, M, K]^T -> [B, N, M]
DenseTensor bmm(const DenseTensor& a, const DenseTensor& b);
DenseTensor bmm_tn(const DenseTensor& a, const DenseTensor& b);
DenseTensor bmm_nt(const DenseTensor& a, const DenseTensor& b);

}  // namespace kernels

namespace reference {

DenseTensor conv2d(const DenseTensor& x, const ConvGeometry& g, const DenseTensor& w,
                   const DenseTensor* bias);
DenseTensor conv2d_ac(const SpikeTensor& x, const ConvGeometry& g, const DenseTensor& w,
                      const DenseTensor* bias);
DenseTensor linear(const DenseTensor& x, const DenseTensor& w, const DenseTensor* bias);
DenseTensor linear_ac(const SpikeTensor& x, const DenseTensor& w, const DenseTensor* bias);
DenseTensor bmm(const DenseTensor& a, const DenseTensor& b);

}  // namespace reference

}  // namespace spikesot
