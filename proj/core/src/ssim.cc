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

#include "fgresq/ssim.h"

#include <cmath>
#include <vector>

#include "fgresq/error.h"

namespace fgresq {
namespace {

std::vector<double> GaussianWindow(int size, double sigma) {
  std::vector<double> w(size);
  const double center = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - center;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable "valid" filtering of a single-channel plane.
std::vector<double> FilterValid(const std::vector<double>& plane, int width,
                                int height, const std::vector<double>& w) {
  const int k = static_cast<int>(w.size());
  const int ow = width - k + 1;
  const int oh = height - k + 1;
  std::vector<double> rows(static_cast<std::size_t>(ow) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += w[i] * plane[y * width + x + i];
      rows[y * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) acc += w[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  }
  return out;
}

double SsimPlane(const Image& a, const Image& b, int channel,
                 const SsimOptions& o) {
  const int width = a.width();
  const int height = a.height();
  const std::size_t n = a.pixel_count();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * width + c;
      x[i] = a.at(c, r, channel);
      y[i] = b.at(c, r, channel);
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
  }
  const auto w = GaussianWindow(o.window, o.sigma);
  const auto mx = FilterValid(x, width, height, w);
  const auto my = FilterValid(y, width, height, w);
  const auto sxx = FilterValid(xx, width, height, w);
  const auto syy = FilterValid(yy, width, height, w);
  const auto sxy = FilterValid(xy, width, height, w);
  const double c1 = (o.k1 * o.dynamic_range) * (o.k1 * o.dynamic_range);
  const double c2 = (o.k2 * o.dynamic_range) * (o.k2 * o.dynamic_range);
  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double mu_x = mx[i];
    const double mu_y = my[i];
    const double var_x = sxx[i] - mu_x * mu_x;
    const double var_y = syy[i] - mu_y * mu_y;
    const double cov = sxy[i] - mu_x * mu_y;
    total += ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) /
             ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2));
  }
  return total / static_cast<double>(mx.size());
}

}  // namespace

double ComputeSsim(const Image& a, const Image& b, const SsimOptions& options) {
  if (!a.SameShape(b)) {
    throw Error(ErrorCode::kDimension, "SSIM inputs differ in shape");
  }
  if (a.width() < options.window || a.height() < options.window) {
    throw Error(ErrorCode::kDimension, "image smaller than the SSIM window");
  }
  if (options.channel_mode == SsimChannelMode::kLuminance ||
      a.channels() == 1) {
    const Image la = ToLuminance(a);
    const Image lb = ToLuminance(b);
    return SsimPlane(la, lb, 0, options);
  }
  double sum = 0.0;
  for (int c = 0; c < a.channels(); ++c) sum += SsimPlane(a, b, c, options);
  return sum / a.channels();
}

}  // namespace fgresq
