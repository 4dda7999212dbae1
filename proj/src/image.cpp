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

#include "spikesot/image.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>

namespace spikesot {

double iou(const PixelBox& a, const PixelBox& b) {
  const double iw = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double ih = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

PixelBox CropTransform::to_image(const BoxPrediction& b) const {
  const double w = b.w * side, h = b.h * side;
  return {x0 + b.cx * side - w / 2, y0 + b.cy * side - h / 2, w, h};
}

BoxPrediction CropTransform::to_crop(const PixelBox& b) const {
  BoxPrediction p;
  p.cx = (b.cx() - x0) / side;
  p.cy = (b.cy() - y0) / side;
  p.w = b.w / side;
  p.h = b.h / side;
  return p;
}

double crop_side(const PixelBox& box, double expansion) {
  return expansion * std::sqrt(box.w * box.h);
}

Crop crop_region(const DenseTensor& frame, const PixelBox& box, double expansion,
                 std::size_t out_size) {
  if (out_size == 0) throw Error("crop_region: output size must be positive");
  if (!(box.w > 0.0) || !(box.h > 0.0)) throw Error("crop_region: degenerate box");
  if (frame.rank() != 3) throw ShapeError("crop_region frame", {3, 0, 0}, frame.shape());
  const std::size_t C = frame.dim(0), H = frame.dim(1), W = frame.dim(2);

  Crop out;
  auto& t = out.transform;
  t.side = crop_side(box, expansion);
  t.x0 = box.cx() - t.side / 2;
  t.y0 = box.cy() - t.side / 2;
  t.out_size = out_size;
  out.image = DenseTensor({C, out_size, out_size});

  const double step = t.side / static_cast<double>(out_size);
  auto pixel = [&](std::size_t c, long y, long x) {
    if (y < 0 || x < 0 || y >= static_cast<long>(H) || x >= static_cast<long>(W)) return 0.0;
    return frame[(c * H + static_cast<std::size_t>(y)) * W + static_cast<std::size_t>(x)];
  };
  for (std::size_t i = 0; i < out_size; ++i) {
    // Sample position in pixel-index space (pixel centers at integers).
    const double sy = t.y0 + (static_cast<double>(i) + 0.5) * step - 0.5;
    const long y0 = static_cast<long>(std::floor(sy));
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t j = 0; j < out_size; ++j) {
      const double sx = t.x0 + (static_cast<double>(j) + 0.5) * step - 0.5;
      const long x0 = static_cast<long>(std::floor(sx));
      const double fx = sx - static_cast<double>(x0);
      for (std::size_t c = 0; c < C; ++c) {
        const double top = (1 - fx) * pixel(c, y0, x0) + fx * pixel(c, y0, x0 + 1);
        const double bot = (1 - fx) * pixel(c, y0 + 1, x0) + fx * pixel(c, y0 + 1, x0 + 1);
        out.image[(c * out_size + i) * out_size + j] = (1 - fy) * top + fy * bot;
      }
    }
  }
  return out;
}

DenseTensor load_frame(const std::string& path) {
  const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error("load_frame: cannot read " + path);
  const auto H = static_cast<std::size_t>(bgr.rows), W = static_cast<std::size_t>(bgr.cols);
  DenseTensor out({3, H, W});
  for (std::size_t y = 0; y < H; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::size_t x = 0; x < W; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        out[(c * H + y) * W + x] = row[x][2 - c] / 255.0;
  }
  return out;
}

void save_frame(const DenseTensor& frame, const std::string& path) {
  if (frame.rank() != 3 || frame.dim(0) != 3)
    throw ShapeError("save_frame", {3, 0, 0}, frame.shape());
  const std::size_t H = frame.dim(1), W = frame.dim(2);
  cv::Mat bgr(static_cast<int>(H), static_cast<int>(W), CV_8UC3);
  for (std::size_t y = 0; y < H; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::size_t x = 0; x < W; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(frame[(c * H + y) * W + x], 0.0, 1.0);
        row[x][2 - c] = static_cast<unsigned char>(std::lround(v * 255.0));
      }
  }
  if (!cv::imwrite(path, bgr)) throw Error("save_frame: cannot write " + path);
}

std::vector<std::string> list_frames(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("frame directory not found: " + dir);
  static const std::vector<std::string> exts{".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm"};
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (std::find(exts.begin(), exts.end(), ext) != exts.end()) files.push_back(e.path().string());
  }
  if (files.empty()) throw Error("no image frames in " + dir);
  std::sort(files.begin(), files.end());
  return files;
}

PixelBox read_init_box(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open init box file " + path);
  std::string line;
  std::getline(in, line);
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream ss(line);
  PixelBox b;
  std::string rest;
  if (!(ss >> b.x >> b.y >> b.w >> b.h) || (ss >> rest))
    throw Error("malformed init box in " + path + ": expected 'x y w h'");
  if (!(b.w > 0.0) || !(b.h > 0.0)) throw Error("init box in " + path + " has no area");
  return b;
}

}  // namespace spikesot
