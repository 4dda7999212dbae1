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

#include <string>
#include <vector>

#include "spikesot/head.hpp"
#include "spikesot/tensor.hpp"

namespace spikesot {

/// Axis-aligned box in pixels: top-left corner and extents. Pixel j covers
/// [j, j + 1).
struct PixelBox {
  double x = 0.0, y = 0.0, w = 0.0, h = 0.0;

  double cx() const { return x + w / 2; }
  double cy() const { return y + h / 2; }
};

double iou(const PixelBox& a, const PixelBox& b);

/// Maps between crop-normalized coordinates ([0, 1] across the crop) and
/// image pixels.
struct CropTransform {
  double x0 = 0.0, y0 = 0.0;  // image position of the crop's top-left corner
  double side = 1.0;          // crop side in image pixels
  std::size_t out_size = 1;

  PixelBox to_image(const BoxPrediction& b) const;
  BoxPrediction to_crop(const PixelBox& b) const;
};

struct Crop {
  DenseTensor image;  // [C, out, out]
  CropTransform transform;
};

/// expansion * sqrt(w h).
double crop_side(const PixelBox& box, double expansion);

/// Square crop centered on the box, zero outside the frame, bilinearly
/// resampled (half-pixel centers) to out_size. frame: [C, H, W].
Crop crop_region(const DenseTensor& frame, const PixelBox& box, double expansion,
                 std::size_t out_size);

/// 8-bit image file -> [3, H, W] RGB in [0, 1].
DenseTensor load_frame(const std::string& path);
/// [3, H, W] in [0, 1] -> 8-bit image file.
void save_frame(const DenseTensor& frame, const std::string& path);
/// Image files of a directory in lexicographic order. Throws when none.
std::vector<std::string> list_frames(const std::string& dir);
/// One line "x y w h" (commas or whitespace).
PixelBox read_init_box(const std::string& path);

}  // namespace spikesot
