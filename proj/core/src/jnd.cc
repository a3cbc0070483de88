// Copyright 2026 The FGResQ Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fgresq/jnd.h"

#include <algorithm>
#include <cmath>

#include "fgresq/error.h"
#include "fgresq/random.h"

namespace fgresq {
namespace {

constexpr int kBackgroundKernel[5][5] = {{1, 1, 1, 1, 1},
                                         {1, 2, 2, 2, 1},
                                         {1, 2, 0, 2, 1},
                                         {1, 2, 2, 2, 1},
                                         {1, 1, 1, 1, 1}};

float Clamped(const Image& img, int x, int y) {
  x = std::clamp(x, 0, img.width() - 1);
  y = std::clamp(y, 0, img.height() - 1);
  return img.at(x, y);
}

}  // namespace

double LuminanceAdaptation(double background, const JndConfig& config) {
  if (background <= 127.0) {
    return config.t0 * (1.0 - std::sqrt(background / 127.0)) + 3.0;
  }
  return config.gamma * (background - 127.0) + 3.0;
}

JndMap ComputeJndMap(const Image& image, const JndConfig& config) {
  if (image.empty() || image.width() == 0 || image.height() == 0) {
    throw Error(ErrorCode::kEmptyImage, "JND map of an empty image");
  }
  const Image lum = ToLuminance(image);
  JndMap map;
  map.width = lum.width();
  map.height = lum.height();
  map.values.resize(lum.pixel_count());
  for (int y = 0; y < lum.height(); ++y) {
    for (int x = 0; x < lum.width(); ++x) {
      double bg = 0.0;
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          bg += kBackgroundKernel[dy + 2][dx + 2] * Clamped(lum, x + dx, y + dy);
        }
      }
      bg /= 32.0;
      const double gx =
          (Clamped(lum, x + 1, y - 1) + 2.0 * Clamped(lum, x + 1, y) +
           Clamped(lum, x + 1, y + 1)) -
          (Clamped(lum, x - 1, y - 1) + 2.0 * Clamped(lum, x - 1, y) +
           Clamped(lum, x - 1, y + 1));
      const double gy =
          (Clamped(lum, x - 1, y + 1) + 2.0 * Clamped(lum, x, y + 1) +
           Clamped(lum, x + 1, y + 1)) -
          (Clamped(lum, x - 1, y - 1) + 2.0 * Clamped(lum, x, y - 1) +
           Clamped(lum, x + 1, y - 1));
      const double gradient = std::hypot(gx, gy) / 8.0;
      const double la = LuminanceAdaptation(bg, config);
      const double cm = config.contrast_gain * gradient;
      map.values[static_cast<std::size_t>(y) * map.width + x] =
          static_cast<float>(std::max(la, cm));
    }
  }
  return map;
}

SignPattern RandomSignPattern(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  SignPattern signs(static_cast<std::size_t>(width) * height);
  for (auto& s : signs) s = (rng.next_u64() & 1) ? 1 : -1;
  return signs;
}

Image OverlayJnd(const Image& image, const JndMap& map,
                 const SignPattern& signs) {
  if (map.width != image.width() || map.height != image.height()) {
    throw Error(ErrorCode::kDimension, "JND map shape does not match image");
  }
  if (!signs.empty() && signs.size() != map.values.size()) {
    throw Error(ErrorCode::kDimension, "sign pattern shape does not match image");
  }
  Image out = image;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * map.width + x;
      const float delta = signs.empty() ? map.values[i] : signs[i] * map.values[i];
      for (int c = 0; c < image.channels(); ++c) {
        out.at(x, y, c) = std::clamp(image.at(x, y, c) + delta, 0.0f,
                                     kMaxIntensity);
      }
    }
  }
  return out;
}

JndMap ScaleJnd(const JndMap& map, double alpha) {
  JndMap out = map;
  for (float& v : out.values) v = static_cast<float>(v * alpha);
  return out;
}

}  // namespace fgresq
