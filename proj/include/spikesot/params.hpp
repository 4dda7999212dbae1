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

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "spikesot/graph.hpp"

namespace spikesot {

/// Named trainable tensors in registration order. Both siamese branches read
/// the same store.
class ParamStore {
 public:
  ag::Var add(const std::string& name, DenseTensor init);
  ag::Var get(const std::string& name) const;
  bool contains(const std::string& name) const;

  const std::vector<std::pair<std::string, ag::Var>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  void set_requires_grad(bool on);

 private:
  std::vector<std::pair<std::string, ag::Var>> entries_;
};

class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}
  DenseTensor normal(const Shape& shape, double stddev);
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Registers parameters under a dotted prefix ("stage1.block0.ssconv").
class ParamBuilder {
 public:
  ParamBuilder(ParamStore& store, Initializer& init, std::string prefix = {})
      : store_(&store), init_(&init), prefix_(std::move(prefix)) {}

  ParamBuilder sub(const std::string& name) const;
  std::string qualified(const std::string& name) const;

  /// Normal(0, gain / sqrt(fan_in)).
  ag::Var weight(const std::string& name, const Shape& shape, std::size_t fan_in, double gain);
  ag::Var filled(const std::string& name, const Shape& shape, double value);

 private:
  ParamStore* store_;
  Initializer* init_;
  std::string prefix_;
};

/// Writes a JSON manifest (name, shape, dtype, byte offset) and a flat blob
/// of little-endian f32 values next to it (`<manifest stem>.bin`).
void save_weights(const ParamStore& store, const std::string& manifest_path);
/// Names and shapes must match the store exactly.
void load_weights(ParamStore& store, const std::string& manifest_path);

}  // namespace spikesot
