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

#include "spikesot/head.hpp"

#include <algorithm>
#include <cmath>

namespace spikesot {

namespace {

HeadTower make_tower(ParamBuilder& pb, const std::string& name, std::size_t in,
                     std::size_t hidden, std::size_t out, const HeadConfig& cfg,
                     const NeuronConfig& nc, double gain) {
  ParamBuilder b = pb.sub(name);
  HeadTower t;
  std::size_t width = in;
  for (std::size_t d = 0; d < cfg.depth; ++d) {
    t.sns.push_back(NeuronLayer::make(b, "sn" + std::to_string(d), nc));
    t.convs.push_back(ConvLayer::make(b, "conv" + std::to_string(d),
                                      ConvGeometry::make(ConvKind::full, width, hidden, 3), gain));
    width = hidden;
  }
  t.sn_out = NeuronLayer::make(b, "sn_out", nc);
  // Output layers start near zero so the first predictions sit at the prior.
  t.out = ConvLayer::make(b, "out", ConvGeometry::make(ConvKind::pointwise, width, out, 1),
                          0.1 * gain);
  return t;
}

ag::Var time_mean_sigmoid(const ag::Var& logits) {
  const std::size_t T = logits->value.dim(0);
  const ag::Var m = T == 1 ? logits : ag::scale(ag::sum_time(logits), 1.0 / T);
  const Shape& s = m->value.shape();
  return ag::sigmoid(ag::reshape(m, {s[1], s[2], s[3]}));
}

}  // namespace

ag::Var HeadTower::operator()(const ag::Var& f, const Exec& exec) const {
  ag::Var x = f;
  for (std::size_t d = 0; d < convs.size(); ++d) x = convs[d](sns[d](x, exec), exec);
  return out(sn_out(x, exec), exec);
}

HeadSpec HeadSpec::make(ParamBuilder& pb, const std::string& name, std::size_t channels,
                        const HeadConfig& cfg, const NeuronConfig& nc, double gain) {
  ParamBuilder b = pb.sub(name);
  const std::size_t hidden = cfg.hidden ? cfg.hidden : channels;
  HeadSpec h;
  h.name = pb.qualified(name);
  h.channels = channels;
  h.score = make_tower(b, "score", channels, hidden, 1, cfg, nc, gain);
  h.offset = make_tower(b, "offset", channels, hidden, 2, cfg, nc, gain);
  h.size = make_tower(b, "size", channels, hidden, 2, cfg, nc, gain);
  h.score.out.bias->value.fill(cfg.score_prior_logit);
  return h;
}

HeadOutput HeadSpec::operator()(const ag::Var& f, const Exec& exec) const {
  const auto& s = f->value.shape();
  if (s.size() != 4 || s[1] != channels || s[2] != s[3])
    throw ShapeError("head '" + name + "'", {0, channels, 0, 0}, s);
  return {time_mean_sigmoid(score(f, exec)), time_mean_sigmoid(offset(f, exec)),
          time_mean_sigmoid(size(f, exec)), s[2]};
}

HeadOutput head_forward(const DenseTensor& f, const HeadSpec& spec, const Exec& exec) {
  if (f.rank() == 3) return spec(ag::constant(f.reshaped({1, f.dim(0), f.dim(1), f.dim(2)})), exec);
  return spec(ag::constant(f), exec);
}

BoxPrediction decode_box(const DenseTensor& score, const DenseTensor& offset,
                         const DenseTensor& size, const DenseTensor* penalty,
                         const PenaltyOptions& opt) {
  const std::size_t n = score.shape().back();
  const std::size_t cells = n * n;
  if (score.size() != cells) throw ShapeError("decode_box score", {1, n, n}, score.shape());
  require_shape("decode_box offset", {2, n, n}, offset.shape());
  require_shape("decode_box size", {2, n, n}, size.shape());
  if (penalty && penalty->size() != cells)
    throw ShapeError("decode_box penalty", {n, n}, penalty->shape());

  std::size_t best = 0;
  double best_v = -1e300;
  for (std::size_t i = 0; i < cells; ++i) {
    double v = score[i];
    if (penalty) {
      v = opt.mode == PenaltyMode::multiplicative
              ? v * (*penalty)[i]
              : (1.0 - opt.window_weight) * v + opt.window_weight * (*penalty)[i];
    }
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  const double ix = static_cast<double>(best % n), iy = static_cast<double>(best / n);
  const double nn = static_cast<double>(n);
  BoxPrediction b;
  b.cell = best;
  b.score = score[best];
  b.cx = std::clamp((ix + offset[best]) / nn, 0.0, 1.0);
  b.cy = std::clamp((iy + offset[cells + best]) / nn, 0.0, 1.0);
  b.w = std::clamp(size[best], 0.0, 1.0);
  b.h = std::clamp(size[cells + best], 0.0, 1.0);
  return b;
}

TargetEncoding encode_targets(const BoxPrediction& gt, std::size_t n) {
  if (n == 0) throw Error("encode_targets: empty map");
  if (!(gt.w > 0.0) || !(gt.h > 0.0)) throw Error("encode_targets: degenerate box");
  if (gt.cx < 0.0 || gt.cx > 1.0 || gt.cy < 0.0 || gt.cy > 1.0)
    throw Error("encode_targets: center outside the unit square");
  const double nn = static_cast<double>(n);
  TargetEncoding t;
  t.ix = std::min(n - 1, static_cast<std::size_t>(std::floor(gt.cx * nn)));
  t.iy = std::min(n - 1, static_cast<std::size_t>(std::floor(gt.cy * nn)));
  t.off_x = gt.cx * nn - static_cast<double>(t.ix);
  t.off_y = gt.cy * nn - static_cast<double>(t.iy);
  t.w = gt.w;
  t.h = gt.h;
  return t;
}

}  // namespace spikesot
