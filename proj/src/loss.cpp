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

#include "spikesot/loss.hpp"

#include <algorithm>
#include <cmath>

namespace spikesot {

namespace {

constexpr double kAreaEps = 1e-9;
constexpr double kProbEps = 1e-6;

}  // namespace

void LossConfig::validate() const {
  if (lambda_giou < 0.0 || lambda_l1 < 0.0) throw Error("LossConfig: negative loss weight");
  if (focal_alpha < 0.0 || focal_beta < 0.0) throw Error("LossConfig: negative focal exponent");
}

BoxLoss giou_loss(const BoxPrediction& pred, const BoxPrediction& gt) {
  const double px1 = pred.cx - pred.w / 2, px2 = pred.cx + pred.w / 2;
  const double py1 = pred.cy - pred.h / 2, py2 = pred.cy + pred.h / 2;
  const double gx1 = gt.cx - gt.w / 2, gx2 = gt.cx + gt.w / 2;
  const double gy1 = gt.cy - gt.h / 2, gy2 = gt.cy + gt.h / 2;

  const double iw_raw = std::min(px2, gx2) - std::max(px1, gx1);
  const double ih_raw = std::min(py2, gy2) - std::max(py1, gy1);
  const double iw = std::max(0.0, iw_raw), ih = std::max(0.0, ih_raw);
  const double inter = iw * ih;
  const double ap = pred.w * pred.h, ag = gt.w * gt.h;
  const double u_raw = ap + ag - inter;
  const double u = std::max(u_raw, kAreaEps);
  const double cw = std::max(px2, gx2) - std::min(px1, gx1);
  const double ch = std::max(py2, gy2) - std::min(py1, gy1);
  const double c_raw = cw * ch;
  const double c = std::max(c_raw, kAreaEps);

  BoxLoss out;
  out.value = 1.0 - (inter / u - (c - u) / c);

  // L = 2 - I/U - U/C with U = Ap + Ag - I.
  const double dl_du = u_raw > kAreaEps ? inter / (u * u) - 1.0 / c : 0.0;
  const double dl_di = -1.0 / u - dl_du;
  const double dl_dc = c_raw > kAreaEps ? u / (c * c) : 0.0;

  const double di_diw = ih, di_dih = iw;
  const double diw_dpx2 = iw_raw > 0.0 && px2 < gx2 ? 1.0 : 0.0;
  const double diw_dpx1 = iw_raw > 0.0 && px1 > gx1 ? -1.0 : 0.0;
  const double dih_dpy2 = ih_raw > 0.0 && py2 < gy2 ? 1.0 : 0.0;
  const double dih_dpy1 = ih_raw > 0.0 && py1 > gy1 ? -1.0 : 0.0;
  const double dcw_dpx2 = px2 > gx2 ? 1.0 : 0.0, dcw_dpx1 = px1 < gx1 ? -1.0 : 0.0;
  const double dch_dpy2 = py2 > gy2 ? 1.0 : 0.0, dch_dpy1 = py1 < gy1 ? -1.0 : 0.0;

  const double dl_dpx1 = dl_di * di_diw * diw_dpx1 + dl_dc * ch * dcw_dpx1;
  const double dl_dpx2 = dl_di * di_diw * diw_dpx2 + dl_dc * ch * dcw_dpx2;
  const double dl_dpy1 = dl_di * di_dih * dih_dpy1 + dl_dc * cw * dch_dpy1;
  const double dl_dpy2 = dl_di * di_dih * dih_dpy2 + dl_dc * cw * dch_dpy2;

  out.grad[0] = dl_dpx1 + dl_dpx2;
  out.grad[1] = dl_dpy1 + dl_dpy2;
  out.grad[2] = 0.5 * (dl_dpx2 - dl_dpx1) + dl_du * pred.h;
  out.grad[3] = 0.5 * (dl_dpy2 - dl_dpy1) + dl_du * pred.w;
  return out;
}

BoxLoss l1_loss(const BoxPrediction& pred, const BoxPrediction& gt) {
  const std::array<double, 4> d{pred.cx - gt.cx, pred.cy - gt.cy, pred.w - gt.w, pred.h - gt.h};
  BoxLoss out;
  for (std::size_t i = 0; i < 4; ++i) {
    out.value += std::abs(d[i]);
    out.grad[i] = d[i] > 0.0 ? 1.0 : (d[i] < 0.0 ? -1.0 : 0.0);
  }
  return out;
}

FocalLoss weighted_focal_loss(const DenseTensor& score, const DenseTensor& target,
                              double alpha, double beta) {
  if (score.size() != target.size())
    throw ShapeError("weighted_focal_loss", target.shape(), score.shape());
  FocalLoss out;
  out.grad = DenseTensor(score.shape());
  double positives = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] < 0.0 || target[i] > 1.0) throw Error("weighted_focal_loss: target outside [0, 1]");
    if (target[i] == 1.0) positives += 1.0;
  }
  const double norm = std::max(1.0, positives);
  for (std::size_t i = 0; i < score.size(); ++i) {
    const double raw = score[i];
    const double p = std::clamp(raw, kProbEps, 1.0 - kProbEps);
    const bool clamped = p != raw;
    double v, g;
    if (target[i] == 1.0) {
      const double q = 1.0 - p;
      v = -std::pow(q, alpha) * std::log(p);
      g = alpha * std::pow(q, alpha - 1.0) * std::log(p) - std::pow(q, alpha) / p;
    } else {
      const double w = std::pow(1.0 - target[i], beta);
      v = -w * std::pow(p, alpha) * std::log(1.0 - p);
      g = -w * (alpha * std::pow(p, alpha - 1.0) * std::log(1.0 - p) -
                std::pow(p, alpha) / (1.0 - p));
    }
    out.value += v / norm;
    out.grad[i] = clamped ? 0.0 : g / norm;
  }
  return out;
}

DenseTensor gaussian_target(std::size_t n, const TargetEncoding& enc, double sigma) {
  if (enc.ix >= n || enc.iy >= n) throw Error("gaussian_target: target outside map");
  if (!(sigma > 0.0)) throw Error("gaussian_target: sigma must be positive");
  DenseTensor t({n, n});
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double dx = static_cast<double>(x) - static_cast<double>(enc.ix);
      const double dy = static_cast<double>(y) - static_cast<double>(enc.iy);
      t[y * n + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
  return t;
}

double gaussian_sigma(const BoxPrediction& gt, std::size_t n) {
  return std::max(0.5, static_cast<double>(n) * std::sqrt(gt.w * gt.h) / 6.0);
}

double total_loss(const LossComponents& c, const LossConfig& cfg) {
  return c.cls + cfg.lambda_giou * c.giou + cfg.lambda_l1 * c.l1;
}

LossComponents LossTerms::components() const {
  return {cls->value[0], giou->value[0], l1->value[0]};
}

LossTerms tracking_loss(const HeadOutput& out, const BoxPrediction& gt, const LossConfig& cfg) {
  cfg.validate();
  const std::size_t n = out.n, cells = n * n;
  const TargetEncoding enc = encode_targets(gt, n);
  const DenseTensor target = gaussian_target(n, enc, gaussian_sigma(gt, n));

  LossTerms terms;
  const FocalLoss focal =
      weighted_focal_loss(out.score->value, target, cfg.focal_alpha, cfg.focal_beta);
  terms.cls = ag::custom(out.score, DenseTensor::scalar(focal.value),
                         [g = focal.grad](const DenseTensor& go) {
                           DenseTensor r = g;
                           r *= go[0];
                           return r;
                         });

  const std::size_t c = enc.cell(n);
  const ag::Var raw = ag::concat_time(
      {ag::gather(out.offset, {c, cells + c}), ag::gather(out.size, {c, cells + c})});
  const double nn = static_cast<double>(n);
  BoxPrediction pred;
  pred.cx = (static_cast<double>(enc.ix) + raw->value[0]) / nn;
  pred.cy = (static_cast<double>(enc.iy) + raw->value[1]) / nn;
  pred.w = raw->value[2];
  pred.h = raw->value[3];
  // d(cx, cy, w, h) / d(off_x, off_y, w, h) is diag(1/n, 1/n, 1, 1).
  auto to_raw = [nn](const BoxLoss& l, double go) {
    return DenseTensor({4}, {l.grad[0] * go / nn, l.grad[1] * go / nn, l.grad[2] * go,
                             l.grad[3] * go});
  };
  const BoxLoss gl = giou_loss(pred, gt);
  const BoxLoss ll = l1_loss(pred, gt);
  terms.giou = ag::custom(raw, DenseTensor::scalar(gl.value),
                          [gl, to_raw](const DenseTensor& go) { return to_raw(gl, go[0]); });
  terms.l1 = ag::custom(raw, DenseTensor::scalar(ll.value),
                        [ll, to_raw](const DenseTensor& go) { return to_raw(ll, go[0]); });
  terms.total = ag::add(ag::add(terms.cls, ag::scale(terms.giou, cfg.lambda_giou)),
                        ag::scale(terms.l1, cfg.lambda_l1));
  return terms;
}

}  // namespace spikesot
