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

#include "spikesot/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

namespace spikesot {

SyntheticSequence make_moving_square(const SyntheticConfig& cfg) {
  if (cfg.square <= 0.0 || cfg.square >= static_cast<double>(cfg.frame_size))
    throw Error("make_moving_square: square must fit inside the frame");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double a = angle(rng);
  const double S = static_cast<double>(cfg.frame_size), lo = 0.0, hi = S - cfg.square;
  double x = (S - cfg.square) / 2, y = (S - cfg.square) / 2;
  double vx = cfg.speed * std::cos(a), vy = cfg.speed * std::sin(a);

  SyntheticSequence seq;
  const std::size_t n = cfg.frame_size;
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    DenseTensor frame({3, n, n}, cfg.background);
    // Anti-aliased square: each pixel gets its covered fraction.
    for (std::size_t r = 0; r < n; ++r) {
      const double cy = std::max(0.0, std::min<double>(r + 1, y + cfg.square) -
                                          std::max<double>(r, y));
      if (cy <= 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        const double cx = std::max(0.0, std::min<double>(c + 1, x + cfg.square) -
                                            std::max<double>(c, x));
        const double v = cfg.background + cx * cy * (cfg.foreground - cfg.background);
        for (std::size_t ch = 0; ch < 3; ++ch) frame[(ch * n + r) * n + c] = v;
      }
    }
    seq.frames.push_back(std::move(frame));
    seq.boxes.push_back({x, y, cfg.square, cfg.square});
    x += vx;
    y += vy;
    if (x < lo || x > hi) {
      vx = -vx;
      x = std::clamp(x, lo, hi);
    }
    if (y < lo || y > hi) {
      vy = -vy;
      y = std::clamp(y, lo, hi);
    }
  }
  return seq;
}

std::vector<TrainSample> make_training_pairs(const SyntheticSequence& seq,
                                             const ModelConfig& cfg, const PairConfig& pc) {
  if (seq.frames.size() < 2) throw Error("make_training_pairs: need at least two frames");
  const std::size_t S = cfg.backbone.input_size;
  const DenseTensor tmpl = crop_region(seq.frames[0], seq.boxes[0], pc.expansion, S).image;
  const DenseTensor templates =
      stack_frames(std::vector<DenseTensor>(cfg.backbone.template_timesteps, tmpl));
  std::mt19937_64 rng(pc.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<TrainSample> out;
  for (std::size_t f = 1; f < seq.frames.size(); ++f) {
    const PixelBox& gt = seq.boxes[f];
    for (std::size_t k = 0; k < pc.per_frame; ++k) {
      const double zoom = std::exp(pc.scale * unit(rng));
      const double side = crop_side(gt, pc.expansion) * zoom;
      const double dx = pc.shift * side * unit(rng), dy = pc.shift * side * unit(rng);
      const PixelBox anchor{gt.cx() + dx - gt.w * zoom / 2, gt.cy() + dy - gt.h * zoom / 2,
                            gt.w * zoom, gt.h * zoom};
      const Crop c = crop_region(seq.frames[f], anchor, pc.expansion, S);
      out.push_back({templates, c.image, c.transform.to_crop(gt)});
    }
  }
  return out;
}

namespace {

struct Slot {
  DenseTensor m, v;
};

double global_norm(const ParamStore& store) {
  double s = 0.0;
  for (const auto& [name, p] : store.entries())
    if (p->has_grad())
      for (double g : p->grad.data()) s += g * g;
  return std::sqrt(s);
}

LossTerms forward_loss(const TrackerModel& model, const TrainSample& s, const LossConfig& loss,
                       const Exec& exec) {
  const MemoryBank bank = model.build_bank(s.templates, exec);
  return tracking_loss(model.predict(s.search, bank, exec), s.gt, loss);
}

}  // namespace

std::vector<TrainStep> toy_train(TrackerModel& model, const std::vector<TrainSample>& samples,
                                 const TrainConfig& cfg,
                                 const std::function<void(const TrainStep&)>& on_step) {
  if (samples.empty()) throw Error("toy_train: no samples");
  ParamStore& store = model.params();
  std::unordered_map<const ag::Node*, Slot> state;
  std::vector<TrainStep> history;
  double b1t = 1.0, b2t = 1.0;

  if (cfg.batch == 0) throw Error("toy_train: batch must be >= 1");
  std::size_t next = 0;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    store.zero_grad();
    TrainStep rec{step, 0.0, {}};
    const double w = 1.0 / static_cast<double>(cfg.batch);
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const TrainSample& sample = samples[next++ % samples.size()];
      ag::Tape tape;
      LossTerms terms;
      {
        ag::TapeScope scope(tape);
        terms = forward_loss(model, sample, cfg.loss, cfg.exec);
      }
      const LossComponents parts = terms.components();
      rec.total += w * terms.total->value[0];
      rec.parts.cls += w * parts.cls;
      rec.parts.giou += w * parts.giou;
      rec.parts.l1 += w * parts.l1;
      if (!std::isfinite(rec.total))
        throw Error("toy_train: non-finite loss at step " + std::to_string(step) + " (cls " +
                    std::to_string(parts.cls) + ", giou " + std::to_string(parts.giou) +
                    ", l1 " + std::to_string(parts.l1) + ")");
      if (cfg.lr != 0.0) {
        ag::Var scaled;
        {
          ag::TapeScope scope(tape);
          scaled = cfg.batch == 1 ? terms.total : ag::scale(terms.total, w);
        }
        tape.backward(scaled);
      }
    }
    history.push_back(rec);
    if (on_step) on_step(rec);
    if (cfg.lr == 0.0) continue;

    const double norm = global_norm(store);
    const double clip = cfg.grad_clip > 0.0 && norm > cfg.grad_clip ? cfg.grad_clip / norm : 1.0;
    b1t *= cfg.beta1;
    b2t *= cfg.beta2;
    for (auto& [name, p] : store.entries()) {
      if (!p->requires_grad || !p->has_grad()) continue;
      Slot& st = state[p.get()];
      if (st.m.empty()) {
        st.m = DenseTensor(p->value.shape());
        st.v = DenseTensor(p->value.shape());
      }
      for (std::size_t i = 0; i < p->value.size(); ++i) {
        const double g = p->grad[i] * clip + cfg.weight_decay * p->value[i];
        if (cfg.optimizer == OptimizerKind::sgd) {
          st.m[i] = cfg.momentum * st.m[i] + g;
          p->value[i] -= cfg.lr * st.m[i];
        } else {
          st.m[i] = cfg.beta1 * st.m[i] + (1 - cfg.beta1) * g;
          st.v[i] = cfg.beta2 * st.v[i] + (1 - cfg.beta2) * g * g;
          const double mh = st.m[i] / (1 - b1t), vh = st.v[i] / (1 - b2t);
          p->value[i] -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
        }
      }
    }
  }
  return history;
}

double evaluate_loss(const TrackerModel& model, const std::vector<TrainSample>& samples,
                     const LossConfig& loss, const Exec& exec) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += forward_loss(model, s, loss, exec).total->value[0];
  return total / static_cast<double>(samples.size());
}

}  // namespace spikesot
