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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fgresq/error.h"
#include "fgresq/image.h"
#include "fgresq/jnd.h"
#include "fgresq/metrics.h"
#include "fgresq/random.h"
#include "fgresq/ssim.h"
#include "fgresq/synthetic.h"

namespace fgresq {
namespace {

Image Gray(int w, int h, float v) { return Image(w, h, 1, v); }

Image NoiseImage(int w, int h, int channels, std::uint64_t seed) {
  Rng rng(seed);
  Image img(w, h, channels);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform(0.0, 255.0));
  return img;
}

// Direct windowed SSIM: every fully-contained 11x11 window, 2-D Gaussian
// weights, statistics accumulated in long double.
double ReferenceSsim(const Image& a, const Image& b) {
  const Image la = ToLuminance(a);
  const Image lb = ToLuminance(b);
  const int r = 5;
  long double w[11][11];
  long double total = 0;
  for (int i = -r; i <= r; ++i) {
    for (int j = -r; j <= r; ++j) {
      w[i + r][j + r] = std::exp(-(i * i + j * j) / (2.0L * 1.5L * 1.5L));
      total += w[i + r][j + r];
    }
  }
  const long double c1 = std::pow(0.01L * 255, 2), c2 = std::pow(0.03L * 255, 2);
  long double sum = 0;
  int count = 0;
  for (int y = r; y < la.height() - r; ++y) {
    for (int x = r; x < la.width() - r; ++x) {
      long double mx = 0, my = 0;
      for (int i = -r; i <= r; ++i) {
        for (int j = -r; j <= r; ++j) {
          const long double k = w[i + r][j + r] / total;
          mx += k * la.at(x + j, y + i);
          my += k * lb.at(x + j, y + i);
        }
      }
      long double vx = 0, vy = 0, cxy = 0;
      for (int i = -r; i <= r; ++i) {
        for (int j = -r; j <= r; ++j) {
          const long double k = w[i + r][j + r] / total;
          const long double dx = la.at(x + j, y + i) - mx;
          const long double dy = lb.at(x + j, y + i) - my;
          vx += k * dx * dx;
          vy += k * dy * dy;
          cxy += k * dx * dy;
        }
      }
      sum += ((2 * mx * my + c1) * (2 * cxy + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return static_cast<double>(sum / count);
}

TEST(Image, NetpbmRoundTrip) {
  for (int channels : {1, 3}) {
    const Image img = Quantize(NoiseImage(7, 5, channels, channels));
    const auto bytes = EncodeNetpbm(img);
    EXPECT_EQ(DecodeNetpbm(bytes, "mem"), img);
  }
}

TEST(Image, DecodeRejectsGarbage) {
  const std::vector<std::uint8_t> junk = {'P', '9', '\n'};
  try {
    DecodeNetpbm(junk, "junk.ppm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Image, ResizeToSameSizeIsIdentity) {
  const Image img = NoiseImage(9, 6, 3, 1);
  EXPECT_EQ(Resize(img, 9, 6), img);
}

TEST(Image, ResizeConstantStaysConstant) {
  const Image r = Resize(Gray(10, 10, 42.0f), 23, 7);
  for (float v : r.data()) EXPECT_NEAR(v, 42.0f, 1e-4);
}

TEST(Image, CropPicksTheWindow) {
  const Image img = NoiseImage(8, 8, 1, 2);
  const Image c = Crop(img, 2, 3, 4, 2);
  EXPECT_EQ(c.width(), 4);
  EXPECT_EQ(c.at(1, 1), img.at(3, 4));
}

TEST(Image, LuminanceWeights) {
  Image px(1, 1, 3);
  px.at(0, 0, 0) = 255;
  EXPECT_NEAR(ToLuminance(px).at(0, 0), 0.299 * 255, 1e-4);
}

TEST(Image, ContentTypes) {
  EXPECT_EQ(ImageContentType("a/b.ppm"), "image/x-portable-pixmap");
  EXPECT_EQ(ImageContentType("a/b.pgm"), "image/x-portable-graymap");
}

TEST(Jnd, UniformGrayIsConstant) {
  const JndMap m = ComputeJndMap(Gray(16, 16, 128.0f));
  for (float v : m.values) EXPECT_FLOAT_EQ(v, m.values[0]);
}

TEST(Jnd, BlackImageIsLuminanceTermAtZero) {
  const JndMap m = ComputeJndMap(Gray(12, 9, 0.0f));
  for (float v : m.values) EXPECT_NEAR(v, LuminanceAdaptation(0.0), 1e-5);
  EXPECT_DOUBLE_EQ(LuminanceAdaptation(0.0), 20.0);
  EXPECT_DOUBLE_EQ(LuminanceAdaptation(127.0), 3.0);
  EXPECT_NEAR(LuminanceAdaptation(255.0), 3.0 + 3.0, 1e-12);
}

TEST(Jnd, EdgeMasksMoreThanFlat) {
  Image step = Gray(32, 32, 60.0f);
  for (int y = 0; y < 32; ++y) {
    for (int x = 16; x < 32; ++x) step.at(x, y) = 200.0f;
  }
  const JndMap m = ComputeJndMap(step);
  for (int y = 0; y < 32; ++y) {
    EXPECT_GE(m.at(16, y), m.at(28, y));
  }
  EXPECT_GT(m.at(16, 16), m.at(28, 16));
}

TEST(Jnd, EmptyImage) {
  try {
    ComputeJndMap(Image());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyImage);
  }
}

TEST(Jnd, OverlayExamples) {
  Image img(2, 2, 1);
  img.at(0, 0) = 10;
  img.at(1, 0) = 20;
  img.at(0, 1) = 30;
  img.at(1, 1) = 40;
  JndMap map{2, 2, {1, 1, 2, 2}};
  const Image out = OverlayJnd(img, map);
  EXPECT_EQ(out.at(0, 0), 11);
  EXPECT_EQ(out.at(1, 0), 21);
  EXPECT_EQ(out.at(0, 1), 32);
  EXPECT_EQ(out.at(1, 1), 42);
  EXPECT_EQ(OverlayJnd(img, JndMap{2, 2, {0, 0, 0, 0}}), img);
  const Image white = Gray(2, 2, 255.0f);
  const Image clipped = OverlayJnd(white, map);
  for (float v : clipped.data()) EXPECT_EQ(v, 255.0f);
  EXPECT_THROW(OverlayJnd(img, JndMap{3, 1, {1, 1, 1}}), Error);
}

TEST(Jnd, RandomSignsAreSeeded) {
  EXPECT_EQ(RandomSignPattern(5, 5, 3), RandomSignPattern(5, 5, 3));
  for (auto s : RandomSignPattern(5, 5, 3)) EXPECT_TRUE(s == 1 || s == -1);
}

TEST(Ssim, IdenticalIsOne) {
  const Image img = NoiseImage(20, 17, 3, 4);
  EXPECT_DOUBLE_EQ(ComputeSsim(img, img), 1.0);
}

TEST(Ssim, Symmetric) {
  const Image a = NoiseImage(24, 24, 1, 5);
  const Image b = NoiseImage(24, 24, 1, 6);
  EXPECT_EQ(ComputeSsim(a, b), ComputeSsim(b, a));
}

TEST(Ssim, MatchesDirectWindowedOracle) {
  const Image clean = SyntheticContent(40, 9);
  const Image noisy = Degrade(clean, Task::kDenoising, 1.0, 3);
  const double s = ComputeSsim(clean, noisy);
  EXPECT_LT(s, 0.7);
  EXPECT_NEAR(s, ReferenceSsim(clean, noisy), 1e-6);
  const Image blurred = Degrade(clean, Task::kDeblurring, 0.5, 0);
  EXPECT_NEAR(ComputeSsim(clean, blurred), ReferenceSsim(clean, blurred), 1e-6);
}

TEST(Ssim, Errors) {
  EXPECT_THROW(ComputeSsim(Gray(20, 20, 1), Gray(21, 20, 1)), Error);
  EXPECT_THROW(ComputeSsim(Gray(10, 10, 1), Gray(10, 10, 1)), Error);
}

TEST(Psnr, Examples) {
  const Image a = Gray(8, 8, 10.0f);
  EXPECT_TRUE(std::isinf(Psnr(a, a)));
  EXPECT_NEAR(Psnr(a, Gray(8, 8, 11.0f)), 10.0 * std::log10(255.0 * 255.0), 1e-9);
  EXPECT_NEAR(Psnr(Gray(4, 4, 0.0f), Gray(4, 4, 255.0f)), 0.0, 1e-12);
}

}  // namespace
}  // namespace fgresq
