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

#include "spikesot/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace spikesot {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

ShapeError::ShapeError(const std::string& context, Shape expected, Shape actual)
    : Error(context + ": expected shape " + to_string(expected) + ", got " +
            to_string(actual)),
      expected_(std::move(expected)),
      actual_(std::move(actual)) {}

void require_shape(const std::string& context, const Shape& expected,
                   const Shape& actual) {
  if (expected != actual) throw ShapeError(context, expected, actual);
}

DenseTensor::DenseTensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(numel(shape_), fill) {}

DenseTensor::DenseTensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != numel(shape_))
    throw Error("DenseTensor: data length " + std::to_string(data_.size()) +
                " does not match shape " + to_string(shape_));
}

DenseTensor DenseTensor::reshaped(Shape shape) const {
  if (numel(shape) != data_.size())
    throw ShapeError("reshape", shape, shape_);
  return DenseTensor(std::move(shape), data_);
}

bool DenseTensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool DenseTensor::all_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

double DenseTensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void DenseTensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  require_shape("DenseTensor::operator+=", shape_, other.shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

SpikeTensor::SpikeTensor(Shape shape, int d_cap)
    : shape_(std::move(shape)), counts_(numel(shape_), 0), d_cap_(d_cap) {
  if (d_cap < 1) throw Error("SpikeTensor: d_cap must be >= 1");
}

SpikeTensor::SpikeTensor(Shape shape, std::vector<std::int32_t> counts, int d_cap)
    : shape_(std::move(shape)), counts_(std::move(counts)), d_cap_(d_cap) {
  if (d_cap < 1) throw Error("SpikeTensor: d_cap must be >= 1");
  if (counts_.size() != numel(shape_))
    throw Error("SpikeTensor: count length does not match shape " + to_string(shape_));
  for (auto c : counts_)
    if (c < 0 || c > d_cap_)
      throw Error("SpikeTensor: count " + std::to_string(c) + " outside [0, " +
                  std::to_string(d_cap_) + "]");
}

SpikeTensor SpikeTensor::reshaped(Shape shape) const {
  if (numel(shape) != counts_.size()) throw ShapeError("reshape", shape, shape_);
  SpikeTensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

FiringStats sfr_measure(const SpikeTensor& s) {
  FiringStats st;
  st.element_count = s.size();
  st.timestep_count = s.rank() >= 2 ? s.dim(0) : 1;
  if (s.size() == 0) return st;
  std::size_t nonzero = 0;
  std::int64_t total = 0;
  for (auto c : s.counts()) {
    nonzero += c > 0;
    total += c;
  }
  st.nonzero_fraction = static_cast<double>(nonzero) / s.size();
  st.mean_integer = static_cast<double>(total) / s.size();
  return st;
}

FiringStats merge_stats(const FiringStats& a, const FiringStats& b) {
  FiringStats out;
  out.element_count = a.element_count + b.element_count;
  out.timestep_count = a.timestep_count + b.timestep_count;
  if (out.element_count == 0) return out;
  const double wa = static_cast<double>(a.element_count) / out.element_count;
  const double wb = static_cast<double>(b.element_count) / out.element_count;
  out.nonzero_fraction = wa * a.nonzero_fraction + wb * b.nonzero_fraction;
  out.mean_integer = wa * a.mean_integer + wb * b.mean_integer;
  return out;
}

DenseTensor spike_to_dense(const SpikeTensor& s) {
  DenseTensor out(s.shape());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = s.value(i);
  return out;
}

std::vector<SpikeTensor> unit_spike_expand(const SpikeTensor& s) {
  std::vector<SpikeTensor> planes;
  planes.reserve(s.d_cap());
  const auto counts = s.counts();
  for (int k = 1; k <= s.d_cap(); ++k) {
    SpikeTensor plane(s.shape(), 1);
    auto out = plane.mutable_counts();
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] >= k ? 1 : 0;
    planes.push_back(std::move(plane));
  }
  return planes;
}

namespace {

Shape joined_shape(const Shape& a, const Shape& b) {
  if (a.empty() || a.size() != b.size() ||
      !std::equal(a.begin() + 1, a.end(), b.begin() + 1))
    throw ShapeError("concat_leading", a, b);
  Shape out = a;
  out[0] += b[0];
  return out;
}

Shape sliced_shape(const Shape& s, std::size_t begin, std::size_t end) {
  if (s.empty() || begin > end || end > s[0])
    throw Error("slice_leading: range [" + std::to_string(begin) + ", " +
                std::to_string(end) + ") invalid for shape " + to_string(s));
  Shape out = s;
  out[0] = end - begin;
  return out;
}

}  // namespace

SpikeTensor concat_leading(const SpikeTensor& a, const SpikeTensor& b) {
  if (a.d_cap() != b.d_cap()) throw Error("concat_leading: d_cap mismatch");
  std::vector<std::int32_t> counts(a.counts().begin(), a.counts().end());
  counts.insert(counts.end(), b.counts().begin(), b.counts().end());
  return SpikeTensor(joined_shape(a.shape(), b.shape()), std::move(counts), a.d_cap());
}

DenseTensor concat_leading(const DenseTensor& a, const DenseTensor& b) {
  std::vector<double> data(a.data().begin(), a.data().end());
  data.insert(data.end(), b.data().begin(), b.data().end());
  return DenseTensor(joined_shape(a.shape(), b.shape()), std::move(data));
}

DenseTensor slice_leading(const DenseTensor& t, std::size_t begin, std::size_t end) {
  Shape shape = sliced_shape(t.shape(), begin, end);
  const std::size_t stride = t.size() / t.dim(0);
  std::vector<double> data(t.data().begin() + begin * stride,
                           t.data().begin() + end * stride);
  return DenseTensor(std::move(shape), std::move(data));
}

SpikeTensor slice_leading(const SpikeTensor& t, std::size_t begin, std::size_t end) {
  Shape shape = sliced_shape(t.shape(), begin, end);
  const std::size_t stride = t.size() / t.dim(0);
  std::vector<std::int32_t> counts(t.counts().begin() + begin * stride,
                                   t.counts().begin() + end * stride);
  return SpikeTensor(std::move(shape), std::move(counts), t.d_cap());
}

}  // namespace spikesot
