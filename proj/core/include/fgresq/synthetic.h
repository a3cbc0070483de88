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

// Procedural images, degradations and populations for fixtures, toy training
// runs and simulation checks. All generators are pure functions of their seed.

#ifndef FGRESQ_SYNTHETIC_H_
#define FGRESQ_SYNTHETIC_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fgresq/data_model.h"
#include "fgresq/filtration.h"
#include "fgresq/image.h"
#include "fgresq/metrics.h"

namespace fgresq {

// RGB texture: a smooth colour gradient, sinusoidal gratings and a few flat
// shapes with hard edges.
Image SyntheticContent(int size, std::uint64_t seed);

// Residual degradation of the given task type; severity in [0, 1], where 0
// returns the input unchanged.
//   deblurring        Gaussian blur, sigma up to 3
//   denoising         additive Gaussian noise, sigma up to 40
//   deraining         bright diagonal streaks
//   dehazing          blend towards a bright airlight
//   super_resolution  bilinear downsample and upsample, factor up to 4
//   mixture           blur followed by noise at reduced strength
Image Degrade(const Image& clean, Task task, double severity, std::uint64_t seed);

Image GaussianBlur(const Image& image, double sigma);

struct SyntheticDatasetOptions {
  std::vector<Task> tasks = {Task::kDeblurring, Task::kDenoising, Task::kDehazing};
  int contents_per_task = 4;
  int images_per_content = 5;
  int image_size = 72;
  double min_severity = 0.05;
  double max_severity = 0.95;
  // One scene per task ("synth-<task>") when true, else a single "synth".
  bool scene_per_task = true;
  // Pairs with a normalized score gap at or below this are labelled equal.
  double equal_margin = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  DatasetManifest manifest;
  std::map<std::string, Image> images;  // by image_id
};

// Images get mos_raw on a 1..5 scale from severity and per-scene mos_norm.
// Every within-group pair is emitted as fine_grained and labelled by score.
SyntheticDataset BuildSyntheticDataset(const SyntheticDatasetOptions& options);

// Image paths are "img/<image_id>.ppm" relative to `dir`; writes
// dir/manifest.jsonl as well.
void WriteSyntheticDataset(const SyntheticDataset& dataset, const std::string& dir);

ImageLoader InMemoryLoader(const SyntheticDataset& dataset);

// Twenty single-pair groups whose score gaps and SSIMs force exactly ten fine,
// five coarse and five unnoticeable outcomes under `calibration`. The
// calibration is computed from the fixture's own reference images.
struct FiltrationFixture {
  SyntheticDataset dataset;
  JndCalibration calibration;
};
FiltrationFixture BuildFiltrationFixture(std::uint64_t seed = 7, int size = 48);

// n clean contents for JND calibration.
std::vector<Image> CalibrationSet(std::size_t n, int size, std::uint64_t seed);

struct NoisyPredictorSample {
  std::vector<double> mos;
  std::vector<double> score;
};
// mos ~ U(0, 1), score = mos + N(0, noise_sd^2).
NoisyPredictorSample NoisyPredictor(std::size_t n, double noise_sd,
                                    std::uint64_t seed);

// Pairs with mos ~ U(0, 1); the annotator picks the truly better image with
// probability sigmoid(slope * |diff|) and answers equal with probability
// equal_rate.
struct PreferencePopulationOptions {
  std::size_t n = 10000;
  double slope = 20.0;
  double equal_rate = 0.0;
  std::uint64_t seed = 0;
};
std::vector<PreferenceObservation> PreferencePopulation(
    const PreferencePopulationOptions& options);

}  // namespace fgresq

#endif  // FGRESQ_SYNTHETIC_H_
