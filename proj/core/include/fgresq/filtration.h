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

// Candidate pair generation and the two-step filtration that keeps only
// fine-grained pairs: a per-scene score-gap filter, then an SSIM filter whose
// threshold is the median SSIM between images and their JND-noise overlays.

#ifndef FGRESQ_FILTRATION_H_
#define FGRESQ_FILTRATION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgresq/data_model.h"
#include "fgresq/image.h"
#include "fgresq/jnd.h"
#include "fgresq/ssim.h"

namespace fgresq {

// Images sharing (content_id, task), in manifest order.
struct ContentGroup {
  std::string content_id;
  Task task;
  std::vector<const ImageRecord*> members;
};

std::vector<ContentGroup> GroupByContent(const DatasetManifest& manifest);

// Total number of candidate pairs, the sum of C(n_g, 2) over groups.
std::uint64_t CandidatePairCount(const DatasetManifest& manifest);

// Calls `visit` once per group with that group's candidate pairs, so callers
// never hold every candidate at once.
void ForEachCandidateGroup(
    const DatasetManifest& manifest,
    const std::function<void(const ContentGroup&,
                             std::vector<PairRecord>&&)>& visit);

// Every 2-subset of every group, image_a < image_b by id, status candidate.
std::vector<PairRecord> GeneratePairs(const DatasetManifest& manifest);

// Retained iff |s_a - s_b| <= tau_d.
bool CoarseFilter(double score_a, double score_b, double tau_d);
// Throws Error(kUnscoredPair) when either member lacks mos_norm.
bool CoarseFilter(const DatasetManifest& manifest, const PairRecord& pair,
                  double tau_d);

struct JndCalibration {
  double ssim_med = 1.0;
  std::int64_t sample_size = 0;
  std::uint64_t seed = 0;
  std::vector<double> per_image_ssim;  // optional, kept in sample order
};

// Lower-middle element of the sorted values. Throws on empty input.
double LowerMedian(std::span<const double> values);

struct CalibrationOptions {
  JndConfig jnd;
  SsimOptions ssim;
  // When set, JND noise uses a seeded random sign per pixel instead of +1.
  std::optional<std::uint64_t> random_sign_seed;
  bool keep_per_image = true;
};

// SSIM(I, I + JND(I)) for a single image.
double JndSsim(const Image& image, const CalibrationOptions& options = {});

// Throws Error(kEmptyDataset) for an empty sample.
JndCalibration CalibrateJndThreshold(std::span<const Image> sample,
                                     const CalibrationOptions& options = {});

std::string CalibrationToJson(const JndCalibration& calibration);
JndCalibration CalibrationFromJson(std::string_view json);

// Seeded sample of up to n image records, without replacement.
std::vector<const ImageRecord*> SelectCalibrationSample(
    const DatasetManifest& manifest, std::size_t n, std::uint64_t seed);

// Retained iff ssim_ab <= ssim_med.
bool UnnoticeableFilter(double ssim_ab, const JndCalibration& calibration);

using ImageLoader = std::function<Image(const ImageRecord&)>;

// Loads record.path relative to `root` (absolute paths are used as is).
ImageLoader DirectoryImageLoader(std::string root);

struct StatusCounts {
  std::int64_t coarse_rejected = 0;
  std::int64_t unnoticeable_rejected = 0;
  std::int64_t fine_grained = 0;

  std::int64_t total() const {
    return coarse_rejected + unnoticeable_rejected + fine_grained;
  }
  bool operator==(const StatusCounts&) const = default;
};

struct FiltrationReport {
  std::map<std::string, StatusCounts> per_scene;
  StatusCounts total;
  double ssim_med = 1.0;
};

std::string FiltrationReportToJson(const FiltrationReport& report);

struct FiltrationConfig {
  // Overrides every scene's tau_d when set (may be 0).
  std::optional<double> tau_d_override;
  SsimOptions ssim;
  int threads = 0;  // 0 = hardware concurrency
};

struct FiltrationResult {
  DatasetManifest manifest;
  FiltrationReport report;
};

// Assigns a terminal status to every candidate pair. When the manifest carries
// no pairs at all, candidates are generated first. Errors are rethrown with
// the offending pair id in the message.
FiltrationResult RunFiltration(const DatasetManifest& manifest,
                               const JndCalibration& calibration,
                               const ImageLoader& loader,
                               const FiltrationConfig& config = {});

}  // namespace fgresq

#endif  // FGRESQ_FILTRATION_H_
