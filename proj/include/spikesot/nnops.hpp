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

#include <optional>
#include <string>

#include "spikesot/kernels.hpp"
#include "spikesot/tensor.hpp"

namespace spikesot {

/// Which arithmetic evaluates a spike-input operator: dense multiply-
/// accumulate over count/D, or event-driven accumulation of weights at spike
/// addresses. Both give the same numbers.
enum class ExecPath { mac, ac };

struct ConvSpec {
  ConvGeometry geometry;
  DenseTensor weights;  // [C_out, C_in / groups, K, K]
  std::optional<DenseTensor> bias;

  void validate() const;
};

struct LinearSpec {
  std::size_t in_features = 0;
  std::size_t out_features = 0;
  DenseTensor weights;  // [out, in]
  std::optional<DenseTensor> bias;
  /// Width multiplier this projection realizes (gamma for the attention value
  /// path, 1/gamma for its output projection, 1 otherwise).
  double expansion = 1.0;

  void validate() const;
};

/// Inference-time batch norm folded to a per-channel affine map.
struct BnFold {
  DenseTensor scale;  // strictly positive
  DenseTensor shift;

  void validate(std::size_t channels) const;
};

/// Spike input of rank 3 ([C, H, W]) is treated as a single timestep.
DenseTensor conv2d(const SpikeTensor& x, const ConvSpec& spec, ExecPath path);
/// Real-valued input (images); always the multiply-accumulate path.
DenseTensor conv2d(const DenseTensor& x, const ConvSpec& spec);

DenseTensor linear(const SpikeTensor& x, const LinearSpec& spec, ExecPath path);
DenseTensor linear(const DenseTensor& x, const LinearSpec& spec);

/// Per-channel affine after a convolution, y = scale * x + shift.
DenseTensor apply_affine(const DenseTensor& x, const BnFold& bn);
ConvSpec fold_batchnorm(const ConvSpec& conv, const BnFold& bn);

/// Window-mean pooling over the two trailing axes down to `target_hw`.
DenseTensor avg_pool_to(const DenseTensor& x, std::size_t target_h, std::size_t target_w);
DenseTensor avg_pool_to(const SpikeTensor& x, std::size_t target_h, std::size_t target_w);
/// Nearest-neighbour replication over the two trailing axes.
DenseTensor upsample_from(const DenseTensor& x, std::size_t target_h, std::size_t target_w);

DenseTensor avg_pool_backward(const DenseTensor& grad_out, const Shape& input_shape);
DenseTensor upsample_backward(const DenseTensor& grad_out, const Shape& input_shape);

/// Outer product of two Hann windows, w[k] = 0.5 - 0.5 cos(2 pi k / (n - 1)).
DenseTensor hanning_2d(std::size_t n);

}  // namespace spikesot
