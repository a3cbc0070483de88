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

#ifndef FGRESQ_IMAGE_H_
#define FGRESQ_IMAGE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fgresq {

inline constexpr float kMaxIntensity = 255.0f;

// Interleaved (HWC) floating-point image with 8-bit dynamic range [0, 255].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * height_;
  }

  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool SameShape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// BT.601 luma for 3-channel input; copies 1-channel input.
Image ToLuminance(const Image& image);

// Rounds and clamps to [0, 255].
Image Quantize(const Image& image);

// Bilinear resampling with pixel-center alignment.
Image Resize(const Image& image, int width, int height);

Image Crop(const Image& image, int x0, int y0, int width, int height);

// Binary PGM (P5) and PPM (P6) with maxval 255. Throws Error(kIo).
Image LoadNetpbm(const std::string& path);
Image DecodeNetpbm(std::span<const std::uint8_t> bytes,
                   const std::string& origin);
void SaveNetpbm(const Image& image, const std::string& path);
std::vector<std::uint8_t> EncodeNetpbm(const Image& image);

// MIME type for a stored image path, derived from its extension.
std::string ImageContentType(const std::string& path);

}  // namespace fgresq

#endif  // FGRESQ_IMAGE_H_
