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

#include <cmath>
#include <random>

#include "spikesot/tensor.hpp"

namespace testutil {

using spikesot::DenseTensor;
using spikesot::Shape;
using spikesot::SpikeTensor;

inline DenseTensor random_dense(std::mt19937_64& rng, const Shape& shape, double lo = -1.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  DenseTensor t(shape);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

inline SpikeTensor random_spikes(std::mt19937_64& rng, const Shape& shape, int d_cap,
                                 double density = 0.5) {
  SpikeTensor s(shape, d_cap);
  std::bernoulli_distribution on(density);
  std::uniform_int_distribution<int> c(1, d_cap);
  for (auto& v : s.mutable_counts()) v = on(rng) ? c(rng) : 0;
  return s;
}

inline double max_diff(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
