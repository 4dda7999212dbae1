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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spikesot {

/// Row-major extents, last index fastest. When a timestep axis is present it
/// is always the leading one.
using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised whenever two extents that must agree do not. Carries both shapes.
class ShapeError : public Error {
 public:
  ShapeError(const std::string& context, Shape expected, Shape actual);

  const Shape& expected() const { return expected_; }
  const Shape& actual() const { return actual_; }

 private:
  Shape expected_;
  Shape actual_;
};

void require_shape(const std::string& context, const Shape& expected, const Shape& actual);

class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape, double fill = 0.0);
  DenseTensor(Shape shape, std::vector<double> data);

  static DenseTensor scalar(double v) { return DenseTensor({1}, {v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  /// Same data, new extents. Element count must match.
  DenseTensor reshaped(Shape shape) const;

  bool all_finite() const;
  bool all_zero() const;
  double max_abs() const;

  void fill(double v);
  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator*=(double s);

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Integer activations in [0, d_cap]; the real value of an element is
/// count / d_cap.
class SpikeTensor {
 public:
  SpikeTensor() = default;
  SpikeTensor(Shape shape, int d_cap);
  SpikeTensor(Shape shape, std::vector<std::int32_t> counts, int d_cap);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return counts_.size(); }
  int d_cap() const { return d_cap_; }

  std::span<const std::int32_t> counts() const { return counts_; }
  std::span<std::int32_t> mutable_counts() { return counts_; }

  double value(std::size_t i) const {
    return static_cast<double>(counts_[i]) / d_cap_;
  }

  SpikeTensor reshaped(Shape shape) const;

  friend bool operator==(const SpikeTensor&, const SpikeTensor&) = default;

 private:
  Shape shape_;
  std::vector<std::int32_t> counts_;
  int d_cap_ = 1;
};

struct FiringStats {
  double nonzero_fraction = 0.0;
  double mean_integer = 0.0;
  std::size_t element_count = 0;
  std::size_t timestep_count = 0;
};

FiringStats sfr_measure(const SpikeTensor& s);

/// Element-count-weighted combination of two measurements.
FiringStats merge_stats(const FiringStats& a, const FiringStats& b);

DenseTensor spike_to_dense(const SpikeTensor& s);

/// Splits integer counts into d_cap binary planes (d_cap = 1 each) where
/// plane k holds 1 wherever count >= k.
std::vector<SpikeTensor> unit_spike_expand(const SpikeTensor& s);

/// Concatenates along the leading axis; trailing extents must agree.
SpikeTensor concat_leading(const SpikeTensor& a, const SpikeTensor& b);
DenseTensor concat_leading(const DenseTensor& a, const DenseTensor& b);

/// Slice [begin, end) of the leading axis.
DenseTensor slice_leading(const DenseTensor& t, std::size_t begin, std::size_t end);
SpikeTensor slice_leading(const SpikeTensor& t, std::size_t begin, std::size_t end);

}  // namespace spikesot
