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

#include "spikesot/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace spikesot {

ag::Var ParamStore::add(const std::string& name, DenseTensor init) {
  if (contains(name)) throw Error("ParamStore: duplicate parameter '" + name + "'");
  ag::Var v = ag::leaf(std::move(init), true);
  entries_.emplace_back(name, v);
  return v;
}

ag::Var ParamStore::get(const std::string& name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return v;
  throw Error("ParamStore: no parameter named '" + name + "'");
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return true;
  return false;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : entries_) n += v->value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, v] : entries_) v->grad = DenseTensor();
}

void ParamStore::set_requires_grad(bool on) {
  for (auto& [name, v] : entries_) v->requires_grad = on;
}

DenseTensor Initializer::normal(const Shape& shape, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  DenseTensor t(shape);
  for (double& v : t.data()) v = dist(rng_);
  return t;
}

ParamBuilder ParamBuilder::sub(const std::string& name) const {
  return ParamBuilder(*store_, *init_, qualified(name));
}

std::string ParamBuilder::qualified(const std::string& name) const {
  return prefix_.empty() ? name : prefix_ + "." + name;
}

ag::Var ParamBuilder::weight(const std::string& name, const Shape& shape, std::size_t fan_in,
                             double gain) {
  return store_->add(qualified(name),
                     init_->normal(shape, gain / std::sqrt(static_cast<double>(fan_in))));
}

ag::Var ParamBuilder::filled(const std::string& name, const Shape& shape, double value) {
  return store_->add(qualified(name), DenseTensor(shape, value));
}

namespace {

static_assert(sizeof(float) == 4);

void put_f32_le(std::ostream& os, float f) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                         static_cast<char>((bits >> 16) & 0xff),
                         static_cast<char>((bits >> 24) & 0xff)};
  os.write(bytes, 4);
}

float get_f32_le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

std::filesystem::path blob_path_for(const std::filesystem::path& manifest) {
  auto p = manifest;
  p.replace_extension(".bin");
  return p;
}

}  // namespace

void save_weights(const ParamStore& store, const std::string& manifest_path) {
  const std::filesystem::path manifest(manifest_path);
  const auto blob = blob_path_for(manifest);
  std::ofstream bin(blob, std::ios::binary);
  if (!bin) throw Error("save_weights: cannot write " + blob.string());

  nlohmann::ordered_json j;
  j["format"] = "spikesot-weights";
  j["version"] = 1;
  j["blob"] = blob.filename().string();
  auto& tensors = j["tensors"] = nlohmann::ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, v] : store.entries()) {
    tensors.push_back({{"name", name},
                       {"shape", v->value.shape()},
                       {"dtype", "f32"},
                       {"byte_order", "little"},
                       {"offset", offset}});
    for (double x : v->value.data()) put_f32_le(bin, static_cast<float>(x));
    offset += 4 * v->value.size();
  }
  std::ofstream out(manifest);
  if (!out) throw Error("save_weights: cannot write " + manifest_path);
  out << j.dump(2) << '\n';
}

void load_weights(ParamStore& store, const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("load_weights: cannot open " + manifest_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("load_weights: malformed manifest: " + std::string(e.what()));
  }
  const auto blob = std::filesystem::path(manifest_path).parent_path() /
                    j.at("blob").get<std::string>();
  std::ifstream bin(blob, std::ios::binary);
  if (!bin) throw Error("load_weights: cannot open " + blob.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)),
                                   std::istreambuf_iterator<char>());

  const auto& tensors = j.at("tensors");
  if (tensors.size() != store.size())
    throw Error("load_weights: manifest lists " + std::to_string(tensors.size()) +
                " tensors, model has " + std::to_string(store.size()));
  for (const auto& t : tensors) {
    const auto name = t.at("name").get<std::string>();
    ag::Var v = store.get(name);
    const auto shape = t.at("shape").get<Shape>();
    require_shape("load_weights '" + name + "'", v->value.shape(), shape);
    if (t.at("dtype").get<std::string>() != "f32")
      throw Error("load_weights: unsupported dtype for '" + name + "'");
    const auto offset = t.at("offset").get<std::uint64_t>();
    if (offset + 4 * v->value.size() > bytes.size())
      throw Error("load_weights: blob too short for '" + name + "'");
    for (std::size_t i = 0; i < v->value.size(); ++i)
      v->value[i] = get_f32_le(bytes.data() + offset + 4 * i);
  }
}

}  // namespace spikesot
