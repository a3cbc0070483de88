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

// Spatial just-noticeable-difference model.
//
// The threshold at each pixel is the larger of two effects:
//   luminance adaptation  LA(bg) = t0 * (1 - sqrt(bg / 127)) + 3   bg <= 127
//                                = gamma * (bg - 127) + 3          bg >  127
//   contrast masking      CM     = contrast_gain * |grad|
// where bg is the 5x5 weighted background luminance and |grad| the Sobel
// gradient magnitude scaled to intensity units (|(gx, gy)| / 8). Borders are
// handled by edge replication.

#ifndef FGRESQ_JND_H_
#define FGRESQ_JND_H_

#include <cstdint>
#include <vector>

#include "fgresq/image.h"

namespace fgresq {

struct JndConfig {
  double t0 = 17.0;
  double gamma = 3.0 / 128.0;
  double contrast_gain = 0.117;
};

struct JndMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major, all >= 0

  float at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

double LuminanceAdaptation(double background, const JndConfig& config = {});

// Input is converted to luminance first. Throws Error(kEmptyImage).
JndMap ComputeJndMap(const Image& image, const JndConfig& config = {});

// Per-pixel sign multipliers (+1 or -1) for the overlay; empty means +1.
using SignPattern = std::vector<std::int8_t>;

SignPattern RandomSignPattern(int width, int height, std::uint64_t seed);

// I + sign * JND(I), clipped to [0, 255]; the map is added to every channel.
// Throws Error(kDimension) on shape mismatch.
Image OverlayJnd(const Image& image, const JndMap& map,
                 const SignPattern& signs = {});

// Scales every threshold by alpha >= 0.
JndMap ScaleJnd(const JndMap& map, double alpha);

}  // namespace fgresq

#endif  // FGRESQ_JND_H_
