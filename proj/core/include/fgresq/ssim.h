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

#ifndef FGRESQ_SSIM_H_
#define FGRESQ_SSIM_H_

#include "fgresq/image.h"

namespace fgresq {

enum class SsimChannelMode {
  kLuminance,       // convert colour input to BT.601 luma first
  kChannelAverage,  // average the per-channel SSIM
};

// Mean SSIM over all fully-contained windows (no padding), using an 11-tap
// Gaussian window with sigma 1.5, K1 = 0.01, K2 = 0.03 and L = 255.
struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  SsimChannelMode channel_mode = SsimChannelMode::kLuminance;
};

// Throws Error(kDimension) when shapes differ or either side is smaller than
// the window.
double ComputeSsim(const Image& a, const Image& b,
                   const SsimOptions& options = {});

}  // namespace fgresq

#endif  // FGRESQ_SSIM_H_
