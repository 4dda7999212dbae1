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

#include "spikesot/model.hpp"

namespace spikesot {

void ModelConfig::validate() const {
  backbone.validate();
  const std::size_t deepest = backbone.input_size / 16;
  if (mrm.grid != 0 && deepest % mrm.grid != 0)
    throw Error("ModelConfig: memory grid " + std::to_string(mrm.grid) +
                " does not divide the stage-4 extent " + std::to_string(deepest));
  const std::size_t tx = backbone.search_timesteps, tz = backbone.template_timesteps;
  if (tx != 1 && tx != tz)
    throw Error("ModelConfig: search timesteps must be 1 or equal to the template timesteps");
  if (head.depth == 0) throw Error("ModelConfig: head depth must be >= 1");
}

std::unique_ptr<TrackerModel> TrackerModel::create(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto m = std::unique_ptr<TrackerModel>(new TrackerModel());
  m->cfg_ = cfg;
  if (m->cfg_.mrm.grid == 0) m->cfg_.mrm.grid = cfg.backbone.input_size / cfg.backbone.stride();
  Initializer init(seed);
  ParamBuilder root(m->store_, init);
  m->backbone_ = Backbone::make(root, cfg.backbone);
  const auto taps = tap_geometry(cfg.backbone);
  for (std::size_t i = 0; i < taps.size(); ++i)
    m->mrms_.push_back(MrmSpec::make(root, "mrm.tap" + std::to_string(i), taps[i],
                                     cfg.backbone.template_timesteps, m->cfg_.mrm,
                                     cfg.backbone.neuron(), cfg.backbone.init_gain));
  const std::size_t final_channels = cfg.backbone.channels.back();
  m->head_ = HeadSpec::make(root, "head", final_channels, cfg.head, cfg.backbone.neuron(),
                            cfg.backbone.init_gain);
  return m;
}

MemoryBank TrackerModel::build_bank(const DenseTensor& templates, const Exec& exec) const {
  if (templates.rank() != 4 || templates.dim(0) != cfg_.backbone.template_timesteps)
    throw ShapeError("build_bank",
                     {cfg_.backbone.template_timesteps, cfg_.backbone.in_channels,
                      cfg_.backbone.input_size, cfg_.backbone.input_size},
                     templates.shape());
  BranchScope branch("template");
  const auto taps = template_forward(backbone_, templates, exec);
  MemoryBank bank;
  for (std::size_t i = 0; i < taps.size(); ++i)
    bank.entries.push_back(build_memory(taps[i], mrms_[i], exec));
  return bank;
}

ag::Var TrackerModel::search_forward(const DenseTensor& x, const MemoryBank& bank,
                                     const Exec& exec) const {
  if (!bank.initialized()) throw Error("search_forward: memory bank not initialized");
  DenseTensor input = x;
  if (x.rank() == 3) {
    // One frame feeds every search timestep.
    const std::size_t T = cfg_.backbone.search_timesteps;
    std::vector<DenseTensor> planes(T, x);
    input = stack_frames(planes);
  }
  BranchScope branch("search");
  return backbone_.forward(ag::constant(std::move(input)), exec, [&](const TapFeature& f) {
    return ag::add(f.tensor, retrieve(f.tensor, bank.at(f.index), mrms_[f.index], exec));
  });
}

HeadOutput TrackerModel::predict(const DenseTensor& x, const MemoryBank& bank,
                                 const Exec& exec) const {
  const ag::Var f = search_forward(x, bank, exec);
  BranchScope branch("search");
  return head_(f, exec);
}

ag::Var search_forward(const TrackerModel& model, const DenseTensor& x, const MemoryBank& bank,
                       const Exec& exec) {
  return model.search_forward(x, bank, exec);
}

}  // namespace spikesot
