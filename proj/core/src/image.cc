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

#include "fgresq/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "fgresq/error.h"

namespace fgresq {

Image::Image(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 0) {
    throw Error(ErrorCode::kDimension, "negative image dimension");
  }
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Image ToLuminance(const Image& image) {
  if (image.channels() == 1) return image;
  if (image.channels() != 3) {
    throw Error(ErrorCode::kDimension,
                "luminance conversion needs 1 or 3 channels");
  }
  Image out(image.width(), image.height(), 1);
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.at(x, y) = 0.299f * image.at(x, y, 0) + 0.587f * image.at(x, y, 1) +
                     0.114f * image.at(x, y, 2);
    }
  }
  return out;
}

Image Quantize(const Image& image) {
  Image out = image;
  for (float& v : out.data()) v = std::clamp(std::round(v), 0.0f, kMaxIntensity);
  return out;
}

Image Resize(const Image& image, int width, int height) {
  if (image.empty()) throw Error(ErrorCode::kEmptyImage, "resize of empty image");
  if (width == image.width() && height == image.height()) return image;
  Image out(width, height, image.channels());
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(image.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(image.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < image.channels(); ++c) {
        const double top =
            (1 - wx) * image.at(x0, y0, c) + wx * image.at(x1, y0, c);
        const double bottom =
            (1 - wx) * image.at(x0, y1, c) + wx * image.at(x1, y1, c);
        out.at(x, y, c) = static_cast<float>((1 - wy) * top + wy * bottom);
      }
    }
  }
  return out;
}

Image Crop(const Image& image, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || x0 + width > image.width() ||
      y0 + height > image.height()) {
    throw Error(ErrorCode::kDimension, "crop window outside image");
  }
  Image out(width, height, image.channels());
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        out.at(x, y, c) = image.at(x0 + x, y0 + y, c);
      }
    }
  }
  return out;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
bool NextToken(std::span<const std::uint8_t> bytes, std::size_t& pos,
               std::string& token) {
  token.clear();
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  return !token.empty();
}

}  // namespace

Image DecodeNetpbm(std::span<const std::uint8_t> bytes,
                   const std::string& origin) {
  std::size_t pos = 0;
  std::string magic, w, h, maxval;
  if (!NextToken(bytes, pos, magic) || !NextToken(bytes, pos, w) ||
      !NextToken(bytes, pos, h) || !NextToken(bytes, pos, maxval)) {
    throw Error(ErrorCode::kIo, "truncated netpbm header in '" + origin + "'");
  }
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw Error(ErrorCode::kIo, "unsupported image format in '" + origin +
                                    "' (expected binary PGM/PPM)");
  }
  int width = 0, height = 0;
  try {
    width = std::stoi(w);
    height = std::stoi(h);
  } catch (const std::exception&) {
    throw Error(ErrorCode::kIo, "bad netpbm dimensions in '" + origin + "'");
  }
  if (maxval != "255") {
    throw Error(ErrorCode::kIo, "only maxval 255 is supported in '" + origin + "'");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kEmptyImage, "zero-sized image '" + origin + "'");
  }
  ++pos;  // single whitespace after maxval
  const std::size_t expected =
      static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() < pos + expected) {
    throw Error(ErrorCode::kIo, "truncated pixel data in '" + origin + "'");
  }
  Image image(width, height, channels);
  auto dst = image.data();
  for (std::size_t i = 0; i < expected; ++i) {
    dst[i] = static_cast<float>(bytes[pos + i]);
  }
  return image;
}

Image LoadNetpbm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open image '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return DecodeNetpbm(bytes, path);
}

std::vector<std::uint8_t> EncodeNetpbm(const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw Error(ErrorCode::kDimension, "netpbm needs 1 or 3 channels");
  }
  const std::string header = std::string(image.channels() == 1 ? "P5" : "P6") +
                             "\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(bytes.size() + image.data().size());
  for (float v : image.data()) {
    bytes.push_back(static_cast<std::uint8_t>(
        std::clamp(std::lround(v), 0L, 255L)));
  }
  return bytes;
}

void SaveNetpbm(const Image& image, const std::string& path) {
  const auto bytes = EncodeNetpbm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write image '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::string ImageContentType(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == "pgm") return "image/x-portable-graymap";
  if (ext == "ppm") return "image/x-portable-pixmap";
  if (ext == "png") return "image/png";
  if (ext == "jpg" || ext == "jpeg") return "image/jpeg";
  if (ext == "bmp") return "image/bmp";
  return "application/octet-stream";
}

}  // namespace fgresq
