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

#include "fgresq/synthetic.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "fgresq/error.h"
#include "fgresq/random.h"

namespace fgresq {

namespace {

float Clamp255(double v) { return static_cast<float>(std::clamp(v, 0.0, 255.0)); }

Image AddNoise(const Image& image, double sigma, std::uint64_t seed) {
  Image out = image;
  if (sigma <= 0.0) return out;
  Rng rng(seed);
  for (float& v : out.data()) v = Clamp255(v + sigma * rng.normal());
  return out;
}

Image RainStreaks(const Image& image, double severity, std::uint64_t seed) {
  Image out = image;
  if (severity <= 0.0) return out;
  Rng rng(seed);
  const int w = image.width();
  const int h = image.height();
  const int streaks = static_cast<int>(std::lround(severity * w * h / 40.0));
  const double alpha = 0.35 + 0.5 * severity;
  for (int s = 0; s < streaks; ++s) {
    const double x0 = rng.uniform(0.0, w);
    const double y0 = rng.uniform(0.0, h);
    const int len = 5 + static_cast<int>(rng.uniform_index(10));
    for (int k = 0; k < len; ++k) {
      const int x = static_cast<int>(x0 + 0.45 * k);
      const int y = static_cast<int>(y0 + k);
      if (x < 0 || x >= w || y < 0 || y >= h) continue;
      for (int c = 0; c < out.channels(); ++c) {
        float& v = out.at(x, y, c);
        v = Clamp255((1.0 - alpha) * v + alpha * 235.0);
      }
    }
  }
  return out;
}

Image Haze(const Image& image, double severity) {
  Image out = image;
  const double t = 0.7 * severity;
  for (float& v : out.data()) v = Clamp255((1.0 - t) * v + t * 225.0);
  return out;
}

Image LowResolution(const Image& image, double severity) {
  const double f = 1.0 + 3.0 * severity;
  const int lw = std::max(1, static_cast<int>(std::lround(image.width() / f)));
  const int lh = std::max(1, static_cast<int>(std::lround(image.height() / f)));
  return Resize(Resize(image, lw, lh), image.width(), image.height());
}

}  // namespace

Image SyntheticContent(int size, std::uint64_t seed) {
  if (size < 1) throw Error(ErrorCode::kInvalidArgument, "content size must be >= 1");
  Rng rng(seed);
  Image out(size, size, 3);
  double c0[3], c1[3];
  for (int c = 0; c < 3; ++c) {
    c0[c] = rng.uniform(30.0, 200.0);
    c1[c] = rng.uniform(30.0, 200.0);
  }
  const double dir = rng.uniform(0.0, 2.0 * std::numbers::pi);
  struct Grating {
    double fx, fy, phase, amp[3];
  };
  Grating gratings[2];
  for (auto& g : gratings) {
    const double f = rng.uniform(0.04, 0.3);
    const double theta = rng.uniform(0.0, std::numbers::pi);
    g.fx = f * std::cos(theta);
    g.fy = f * std::sin(theta);
    g.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (double& a : g.amp) a = rng.uniform(10.0, 35.0);
  }
  const double ux = std::cos(dir);
  const double uy = std::sin(dir);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = 0.5 + ((x - size / 2.0) * ux + (y - size / 2.0) * uy) / size;
      for (int c = 0; c < 3; ++c) {
        double v = (1.0 - t) * c0[c] + t * c1[c];
        for (const auto& g : gratings) {
          v += g.amp[c] * std::sin(2.0 * std::numbers::pi * (g.fx * x + g.fy * y) + g.phase);
        }
        out.at(x, y, c) = Clamp255(v);
      }
    }
  }
  const int shapes = 2 + static_cast<int>(rng.uniform_index(3));
  for (int s = 0; s < shapes; ++s) {
    const bool disk = rng.uniform01() < 0.5;
    const double cx = rng.uniform(0.0, size);
    const double cy = rng.uniform(0.0, size);
    const double r = rng.uniform(0.08, 0.25) * size;
    double color[3];
    for (double& v : color) v = rng.uniform(0.0, 255.0);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        const double dx = x - cx;
        const double dy = y - cy;
        const bool inside = disk ? dx * dx + dy * dy <= r * r
                                 : std::abs(dx) <= r && std::abs(dy) <= 0.6 * r;
        if (!inside) continue;
        for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(color[c]);
      }
    }
  }
  return Quantize(out);
}

Image GaussianBlur(const Image& image, double sigma) {
  if (sigma < 0.05) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  const int w = image.width();
  const int h = image.height();
  Image tmp(w, h, image.channels());
  Image out(w, h, image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * image.at(std::clamp(x + i, 0, w - 1), y, c);
        }
        tmp.at(x, y, c) = static_cast<float>(acc);
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i) {
          acc += k[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1), c);
        }
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Image Degrade(const Image& clean, Task task, double severity, std::uint64_t seed) {
  if (clean.empty()) throw Error(ErrorCode::kEmptyImage, "degrading an empty image");
  const double s = std::clamp(severity, 0.0, 1.0);
  Image out;
  switch (task) {
    case Task::kDeblurring: out = GaussianBlur(clean, 3.0 * s); break;
    case Task::kDenoising: out = AddNoise(clean, 40.0 * s, seed); break;
    case Task::kDeraining: out = RainStreaks(clean, s, seed); break;
    case Task::kDehazing: out = Haze(clean, s); break;
    case Task::kSuperResolution: out = LowResolution(clean, s); break;
    case Task::kMixture:
      out = AddNoise(GaussianBlur(clean, 1.8 * s), 24.0 * s, seed);
      break;
  }
  return Quantize(out);
}

SyntheticDataset BuildSyntheticDataset(const SyntheticDatasetOptions& options) {
  if (options.tasks.empty() || options.contents_per_task < 1 ||
      options.images_per_content < 1) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic dataset would be empty");
  }
  SyntheticDataset out;
  std::vector<Image> contents;
  for (int k = 0; k < options.contents_per_task; ++k) {
    contents.push_back(SyntheticContent(
        options.image_size, DeriveSeed(options.seed, 1000 + static_cast<std::uint64_t>(k))));
  }
  std::map<std::string, std::int64_t> scene_counts;
  std::uint64_t stream = 0;
  for (Task task : options.tasks) {
    const std::string scene = options.scene_per_task
                                  ? "synth-" + std::string(ToString(task))
                                  : std::string("synth");
    for (int k = 0; k < options.contents_per_task; ++k) {
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "c%02d", k);
      // Content ids are unique per task; the pixels are shared across tasks.
      const std::string content_id = std::string(ToString(task)) + "-" + suffix;
      for (int i = 0; i < options.images_per_content; ++i) {
        Rng rng(DeriveSeed(options.seed, 5000 + stream));
        const double severity = rng.uniform(options.min_severity, options.max_severity);
        ImageRecord r;
        r.image_id = content_id + "-" + std::to_string(i);
        r.scene_id = scene;
        r.content_id = content_id;
        r.task = task;
        r.mos_raw = 1.0 + 4.0 * (1.0 - severity);
        r.path = "img/" + r.image_id + ".ppm";
        out.images[r.image_id] =
            Degrade(contents[k], task, severity, DeriveSeed(options.seed, 9000 + stream));
        out.manifest.images.push_back(r);
        ++scene_counts[scene];
        ++stream;
      }
    }
  }
  for (const auto& [scene, count] : scene_counts) {
    out.manifest.scenes.push_back({scene, kDefaultTauD, count});
  }
  out.manifest.Rebuild();
  out.manifest = NormalizeManifestMos(out.manifest);
  out.manifest.pairs = GeneratePairs(out.manifest);
  for (auto& p : out.manifest.pairs) {
    const double a = *out.manifest.Image(p.image_a).mos_norm;
    const double b = *out.manifest.Image(p.image_b).mos_norm;
    p.status = PairStatus::kFineGrained;
    if (std::abs(a - b) <= options.equal_margin) {
      p.preference = Preference::kEqual;
    } else {
      p.preference = a > b ? Preference::kA : Preference::kB;
    }
  }
  out.manifest.Rebuild();
  return out;
}

void WriteSyntheticDataset(const SyntheticDataset& dataset, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "img");
  for (const auto& r : dataset.manifest.images) {
    SaveNetpbm(dataset.images.at(r.image_id), (fs::path(dir) / r.path).string());
  }
  SaveManifest(dataset.manifest, (fs::path(dir) / "manifest.jsonl").string());
}

ImageLoader InMemoryLoader(const SyntheticDataset& dataset) {
  const auto* images = &dataset.images;
  return [images](const ImageRecord& r) -> Image {
    auto it = images->find(r.image_id);
    if (it == images->end()) {
      throw Error(ErrorCode::kNotFound, "no image for '" + r.image_id + "'");
    }
    return it->second;
  };
}

FiltrationFixture BuildFiltrationFixture(std::uint64_t seed, int size) {
  FiltrationFixture fx;
  auto& m = fx.dataset.manifest;
  std::vector<Image> references;
  for (int g = 0; g < 20; ++g) {
    char content_id[16];
    std::snprintf(content_id, sizeof(content_id), "f%02d", g);
    const Image ref = SyntheticContent(size, DeriveSeed(seed, static_cast<std::uint64_t>(g)));
    references.push_back(ref);
    Image other;
    double gap = 0.05;
    if (g < 15) {
      // Clearly visible difference; the first ten keep a small score gap.
      other = Degrade(ref, Task::kDenoising, 0.75, DeriveSeed(seed, 100 + static_cast<std::uint64_t>(g)));
      if (g >= 10) gap = 0.3;
    } else {
      // A handful of one-level changes, far below the visibility threshold.
      other = ref;
      Rng rng(DeriveSeed(seed, 200 + static_cast<std::uint64_t>(g)));
      for (int k = 0; k < 4; ++k) {
        const int x = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(size)));
        const int y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(size)));
        float& v = other.at(x, y, 0);
        v = v < 255.0f ? v + 1.0f : v - 1.0f;
      }
    }
    ImageRecord a{std::string(content_id) + "-a", "fixture", content_id,
                  Task::kDenoising, std::nullopt, 0.5, ""};
    ImageRecord b{std::string(content_id) + "-b", "fixture", content_id,
                  Task::kDenoising, std::nullopt, 0.5 - gap, ""};
    a.mos_raw = 1.0 + 4.0 * *a.mos_norm;
    b.mos_raw = 1.0 + 4.0 * *b.mos_norm;
    a.path = "img/" + a.image_id + ".ppm";
    b.path = "img/" + b.image_id + ".ppm";
    fx.dataset.images[a.image_id] = ref;
    fx.dataset.images[b.image_id] = other;
    m.images.push_back(a);
    m.images.push_back(b);
  }
  m.scenes.push_back({"fixture", kDefaultTauD, static_cast<std::int64_t>(m.images.size())});
  m.Rebuild();
  fx.calibration = CalibrateJndThreshold(references);
  return fx;
}

std::vector<Image> CalibrationSet(std::size_t n, int size, std::uint64_t seed) {
  std::vector<Image> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(SyntheticContent(size, DeriveSeed(seed, i)));
  }
  return out;
}

NoisyPredictorSample NoisyPredictor(std::size_t n, double noise_sd,
                                    std::uint64_t seed) {
  NoisyPredictorSample s;
  s.mos.reserve(n);
  s.score.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double mos = rng.uniform01();
    s.mos.push_back(mos);
    s.score.push_back(mos + noise_sd * rng.normal());
  }
  return s;
}

std::vector<PreferenceObservation> PreferencePopulation(
    const PreferencePopulationOptions& options) {
  std::vector<PreferenceObservation> out;
  out.reserve(options.n);
  Rng rng(options.seed);
  for (std::size_t i = 0; i < options.n; ++i) {
    PreferenceObservation o;
    o.mos_a = rng.uniform01();
    o.mos_b = rng.uniform01();
    const double diff = o.mos_a - o.mos_b;
    const bool equal = rng.uniform01() < options.equal_rate;
    const double p_correct = 1.0 / (1.0 + std::exp(-options.slope * std::abs(diff)));
    const bool correct = rng.uniform01() < p_correct;
    if (equal) {
      o.preference = Preference::kEqual;
    } else {
      const bool a_better = diff >= 0.0;
      o.preference = (a_better == correct) ? Preference::kA : Preference::kB;
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace fgresq
