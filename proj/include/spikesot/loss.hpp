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

#include <array>

#include "spikesot/graph.hpp"
#include "spikesot/head.hpp"

namespace spikesot {

struct LossConfig {
  double lambda_giou = 2.0;
  double lambda_l1 = 5.0;
  double focal_alpha = 2.0;
  double focal_beta = 4.0;

  void validate() const;
};

/// Value and gradient with respect to the predicted (cx, cy, w, h).
struct BoxLoss {
  double value = 0.0;
  std::array<double, 4> grad{};
};

/// 1 - GIoU. Areas below 1e-9 are clamped.
BoxLoss giou_loss(const BoxPrediction& pred, const BoxPrediction& gt);
/// Sum of |pred - gt| over (cx, cy, w, h).
BoxLoss l1_loss(const BoxPrediction& pred, const BoxPrediction& gt);

struct FocalLoss {
  double value = 0.0;
  DenseTensor grad;  // with respect to the score probabilities
};

/// Penalty-reduced focal loss on probabilities, normalized by the number of
/// cells whose target equals 1 (at least 1). Probabilities are clamped to
/// [1e-6, 1 - 1e-6].
FocalLoss weighted_focal_loss(const DenseTensor& score, const DenseTensor& target,
                              double alpha = 2.0, double beta = 4.0);

/// Gaussian splat with peak exactly 1 at the target cell.
DenseTensor gaussian_target(std::size_t n, const TargetEncoding& enc, double sigma);
/// sigma = max(0.5, n * sqrt(w h) / 6), in cells.
double gaussian_sigma(const BoxPrediction& gt, std::size_t n);

struct LossComponents {
  double cls = 0.0;
  double giou = 0.0;
  double l1 = 0.0;
};

double total_loss(const LossComponents& c, const LossConfig& cfg = {});

/// Loss terms recorded on the active tape. The box is read at the ground
/// truth center cell.
struct LossTerms {
  ag::Var cls, giou, l1, total;

  LossComponents components() const;
};

LossTerms tracking_loss(const HeadOutput& out, const BoxPrediction& gt,
                        const LossConfig& cfg = {});

}  // namespace spikesot
