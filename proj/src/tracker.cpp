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

#include "spikesot/tracker.hpp"

namespace spikesot {

void TrackerConfig::validate() const {
  if (update_interval < 1) throw Error("TrackerConfig: update interval must be >= 1");
  if (update_threshold < 0.0 || update_threshold > 1.0)
    throw Error("TrackerConfig: update threshold must lie in [0, 1]");
  if (!(crop_expansion > 0.0)) throw Error("TrackerConfig: crop expansion must be positive");
  if (!(size_rate > 0.0) || size_rate > 1.0)
    throw Error("TrackerConfig: size rate must lie in (0, 1]");
}

TrackerConfig TrackerConfig::preset(const std::string& name) {
  TrackerConfig c;
  if (name == "default") return c;
  if (name == "lasot") {
    c.update_interval = 40;
    c.update_threshold = 0.8;
    return c;
  }
  throw Error("unknown tracker preset '" + name + "' (expected default or lasot)");
}

TemplateQueue::TemplateQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("TemplateQueue: capacity must be >= 1");
}

void TemplateQueue::fill(const DenseTensor& crop) {
  slots_.assign(capacity_, crop);
  next_ = 1;
}

bool TemplateQueue::push(const DenseTensor& crop) {
  if (slots_.empty()) throw Error("TemplateQueue: push before fill");
  if (capacity_ == 1) return false;
  slots_[next_] = crop;
  next_ = next_ + 1 == capacity_ ? 1 : next_ + 1;
  return true;
}

DenseTensor TemplateQueue::stacked() const { return stack_frames(slots_); }

Tracker::Tracker(const TrackerModel& model, TrackerConfig cfg)
    : model_(&model),
      cfg_(std::move(cfg)),
      queue_(model.config().backbone.template_timesteps),
      input_size_(model.config().backbone.input_size) {
  cfg_.validate();
}

void Tracker::rebuild_bank() {
  bank_ = model_->build_bank(queue_.stacked(), cfg_.exec);
}

void Tracker::init(const DenseTensor& frame, const PixelBox& box) {
  if (!(box.w > 0.0) || !(box.h > 0.0)) throw Error("Tracker::init: degenerate box");
  if (frame.rank() != 3) throw ShapeError("Tracker::init frame", {3, 0, 0}, frame.shape());
  const auto fh = static_cast<double>(frame.dim(1)), fw = static_cast<double>(frame.dim(2));
  if (box.x + box.w <= 0.0 || box.y + box.h <= 0.0 || box.x >= fw || box.y >= fh)
    throw Error("Tracker::init: box outside the frame");
  queue_.fill(crop_region(frame, box, cfg_.crop_expansion, input_size_).image);
  rebuild_bank();
  ++counters_.template_passes;
  box_ = box;
  frame_ = 0;
}

TrackResult Tracker::track(const DenseTensor& frame) {
  if (!initialized()) throw Error("Tracker::track before init");
  ++frame_;
  if (cfg_.recompute_memory) {
    rebuild_bank();
    ++counters_.recompute_passes;
  }
  const Crop crop = crop_region(frame, box_, cfg_.crop_expansion, input_size_);
  const HeadOutput out = model_->predict(crop.image, bank_, cfg_.exec);
  ++counters_.search_passes;

  if (cfg_.hanning && window_.size() != out.n * out.n) window_ = hanning_2d(out.n);
  const BoxPrediction pred = decode_box(out.score->value, out.offset->value, out.size->value,
                                        cfg_.hanning ? &window_ : nullptr, cfg_.penalty);
  TrackResult r;
  r.frame_index = frame_;
  r.box = crop.transform.to_image(pred);
  if (cfg_.size_rate < 1.0) {
    const double cx = r.box.cx(), cy = r.box.cy();
    r.box.w = box_.w + cfg_.size_rate * (r.box.w - box_.w);
    r.box.h = box_.h + cfg_.size_rate * (r.box.h - box_.h);
    r.box.x = cx - r.box.w / 2;
    r.box.y = cy - r.box.h / 2;
  }
  r.score = pred.score;
  if (r.box.w > 0.0 && r.box.h > 0.0) box_ = r.box;

  if (frame_ % cfg_.update_interval == 0 && r.score > cfg_.update_threshold &&
      queue_.capacity() > 1) {
    queue_.push(crop_region(frame, box_, cfg_.crop_expansion, input_size_).image);
    rebuild_bank();
    ++counters_.template_passes;
    r.template_updated = true;
  }
  return r;
}

bool cached_vs_recomputed_check(const TrackerModel& model, const TrackerConfig& cfg,
                                const std::vector<DenseTensor>& frames, const PixelBox& init_box) {
  if (frames.empty()) return true;
  TrackerConfig cached = cfg, fresh = cfg;
  cached.recompute_memory = false;
  fresh.recompute_memory = true;
  Tracker a(model, cached), b(model, fresh);
  a.init(frames[0], init_box);
  b.init(frames[0], init_box);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const TrackResult ra = a.track(frames[i]);
    const TrackResult rb = b.track(frames[i]);
    if (ra.box.x != rb.box.x || ra.box.y != rb.box.y || ra.box.w != rb.box.w ||
        ra.box.h != rb.box.h || ra.score != rb.score || ra.template_updated != rb.template_updated)
      return false;
  }
  return true;
}

}  // namespace spikesot
