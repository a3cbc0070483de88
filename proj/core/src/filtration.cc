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

#include "fgresq/filtration.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <unordered_map>

#include "fgresq/error.h"
#include "fgresq/parallel.h"
#include "fgresq/random.h"

namespace fgresq {
namespace {

using nlohmann::json;

json CountsToJson(const StatusCounts& c) {
  return {{"coarse_rejected", c.coarse_rejected},
          {"unnoticeable_rejected", c.unnoticeable_rejected},
          {"fine_grained", c.fine_grained}};
}

void Tally(StatusCounts& counts, PairStatus status) {
  switch (status) {
    case PairStatus::kCoarseRejected: ++counts.coarse_rejected; break;
    case PairStatus::kUnnoticeableRejected: ++counts.unnoticeable_rejected; break;
    case PairStatus::kFineGrained: ++counts.fine_grained; break;
    case PairStatus::kCandidate: break;
  }
}

}  // namespace

std::vector<ContentGroup> GroupByContent(const DatasetManifest& manifest) {
  std::vector<ContentGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& img : manifest.images) {
    const std::string key = img.content_id + '\x1f' + std::string(ToString(img.task));
    auto [it, inserted] = index.emplace(key, groups.size());
    if (inserted) groups.push_back({img.content_id, img.task, {}});
    groups[it->second].members.push_back(&img);
  }
  return groups;
}

std::uint64_t CandidatePairCount(const DatasetManifest& manifest) {
  std::uint64_t total = 0;
  for (const auto& g : GroupByContent(manifest)) {
    const std::uint64_t n = g.members.size();
    total += n * (n - (n > 0 ? 1 : 0)) / 2;
  }
  return total;
}

void ForEachCandidateGroup(
    const DatasetManifest& manifest,
    const std::function<void(const ContentGroup&, std::vector<PairRecord>&&)>&
        visit) {
  for (const auto& group : GroupByContent(manifest)) {
    std::vector<const ImageRecord*> members = group.members;
    std::sort(members.begin(), members.end(),
              [](const ImageRecord* a, const ImageRecord* b) {
                return a->image_id < b->image_id;
              });
    std::vector<PairRecord> pairs;
    pairs.reserve(members.size() * (members.size() - 1) / 2 + 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        PairRecord p;
        p.image_a = members[i]->image_id;
        p.image_b = members[j]->image_id;
        p.pair_id = CanonicalPairId(p.image_a, p.image_b);
        pairs.push_back(std::move(p));
      }
    }
    visit(group, std::move(pairs));
  }
}

std::vector<PairRecord> GeneratePairs(const DatasetManifest& manifest) {
  std::vector<PairRecord> all;
  ForEachCandidateGroup(manifest,
                        [&](const ContentGroup&, std::vector<PairRecord>&& p) {
                          std::move(p.begin(), p.end(), std::back_inserter(all));
                        });
  return all;
}

bool CoarseFilter(double score_a, double score_b, double tau_d) {
  return std::abs(score_a - score_b) <= tau_d;
}

bool CoarseFilter(const DatasetManifest& manifest, const PairRecord& pair,
                  double tau_d) {
  const auto& a = manifest.Image(pair.image_a);
  const auto& b = manifest.Image(pair.image_b);
  if (!a.mos_norm || !b.mos_norm) {
    throw Error(ErrorCode::kUnscoredPair,
                "pair '" + pair.pair_id + "' has a member without mos_norm");
  }
  return CoarseFilter(*a.mos_norm, *b.mos_norm, tau_d);
}

double LowerMedian(std::span<const double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "median of an empty sample");
  }
  std::vector<double> sorted(values.begin(), values.end());
  const std::size_t k = (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + k, sorted.end());
  return sorted[k];
}

double JndSsim(const Image& image, const CalibrationOptions& options) {
  const JndMap map = ComputeJndMap(image, options.jnd);
  SignPattern signs;
  if (options.random_sign_seed) {
    signs = RandomSignPattern(image.width(), image.height(),
                              *options.random_sign_seed);
  }
  return ComputeSsim(image, OverlayJnd(image, map, signs), options.ssim);
}

JndCalibration CalibrateJndThreshold(std::span<const Image> sample,
                                     const CalibrationOptions& options) {
  if (sample.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "JND calibration sample is empty");
  }
  std::vector<double> ssim(sample.size());
  ParallelFor(sample.size(), 0,
              [&](std::size_t i) { ssim[i] = JndSsim(sample[i], options); });
  JndCalibration cal;
  cal.ssim_med = LowerMedian(ssim);
  cal.sample_size = static_cast<std::int64_t>(sample.size());
  if (options.keep_per_image) cal.per_image_ssim = std::move(ssim);
  return cal;
}

std::string CalibrationToJson(const JndCalibration& calibration) {
  json obj = {{"ssim_med", calibration.ssim_med},
              {"sample_size", calibration.sample_size},
              {"seed", calibration.seed}};
  if (!calibration.per_image_ssim.empty()) {
    obj["per_image_ssim"] = calibration.per_image_ssim;
  }
  return obj.dump(2) + "\n";
}

JndCalibration CalibrationFromJson(std::string_view text) {
  try {
    const json obj = json::parse(text);
    JndCalibration cal;
    cal.ssim_med = obj.at("ssim_med").get<double>();
    cal.sample_size = obj.at("sample_size").get<std::int64_t>();
    cal.seed = obj.value("seed", std::uint64_t{0});
    if (obj.contains("per_image_ssim")) {
      cal.per_image_ssim = obj["per_image_ssim"].get<std::vector<double>>();
    }
    if (cal.sample_size < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "calibration sample_size must be >= 1");
    }
    return cal;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed calibration file: ") + e.what());
  }
}

std::vector<const ImageRecord*> SelectCalibrationSample(
    const DatasetManifest& manifest, std::size_t n, std::uint64_t seed) {
  std::vector<const ImageRecord*> records;
  records.reserve(manifest.images.size());
  for (const auto& img : manifest.images) records.push_back(&img);
  std::sort(records.begin(), records.end(),
            [](const ImageRecord* a, const ImageRecord* b) {
              return a->image_id < b->image_id;
            });
  Rng rng(seed);
  rng.shuffle(std::span<const ImageRecord*>(records));
  if (records.size() > n) records.resize(n);
  return records;
}

bool UnnoticeableFilter(double ssim_ab, const JndCalibration& calibration) {
  return ssim_ab <= calibration.ssim_med;
}

ImageLoader DirectoryImageLoader(std::string root) {
  return [root = std::move(root)](const ImageRecord& record) {
    std::filesystem::path p(record.path);
    if (p.is_relative() && !root.empty()) p = std::filesystem::path(root) / p;
    return LoadNetpbm(p.string());
  };
}

std::string FiltrationReportToJson(const FiltrationReport& report) {
  json scenes = json::object();
  for (const auto& [scene, counts] : report.per_scene) {
    scenes[scene] = CountsToJson(counts);
  }
  json obj = {{"ssim_med", report.ssim_med},
              {"total", CountsToJson(report.total)},
              {"per_scene", scenes}};
  return obj.dump(2) + "\n";
}

FiltrationResult RunFiltration(const DatasetManifest& manifest,
                               const JndCalibration& calibration,
                               const ImageLoader& loader,
                               const FiltrationConfig& config) {
  FiltrationResult result;
  result.manifest = manifest;
  auto& pairs = result.manifest.pairs;
  if (pairs.empty()) {
    pairs = GeneratePairs(manifest);
    result.manifest.Rebuild();
  }
  const DatasetManifest& m = result.manifest;

  // Candidate indices bucketed by content group; each bucket shares an image
  // cache and runs on one worker.
  std::vector<std::vector<std::size_t>> buckets;
  std::unordered_map<std::string, std::size_t> bucket_of;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].status != PairStatus::kCandidate) continue;
    const auto& content = m.Image(pairs[i].image_a).content_id;
    auto [it, inserted] = bucket_of.emplace(content, buckets.size());
    if (inserted) buckets.emplace_back();
    buckets[it->second].push_back(i);
  }

  ParallelFor(buckets.size(), config.threads, [&](std::size_t b) {
    std::unordered_map<std::string, Image> cache;
    auto fetch = [&](const PairRecord& pair,
                     const std::string& id) -> const Image& {
      auto it = cache.find(id);
      if (it != cache.end()) return it->second;
      try {
        return cache.emplace(id, loader(m.Image(id))).first->second;
      } catch (const Error& e) {
        throw Error(ErrorCode::kIo, "pair '" + pair.pair_id +
                                        "': cannot load image '" + id +
                                        "': " + e.what());
      }
    };
    for (std::size_t i : buckets[b]) {
      PairRecord& pair = pairs[i];
      const double tau = config.tau_d_override.value_or(
          m.Scene(m.Image(pair.image_a).scene_id).tau_d);
      if (!CoarseFilter(m, pair, tau)) {
        pair.status = PairStatus::kCoarseRejected;
        continue;
      }
      const Image& a = fetch(pair, pair.image_a);
      const Image& bimg = fetch(pair, pair.image_b);
      double ssim = 0.0;
      try {
        ssim = ComputeSsim(a, bimg, config.ssim);
      } catch (const Error& e) {
        throw Error(e.code(), "pair '" + pair.pair_id + "': " + e.what());
      }
      pair.ssim_ab = std::clamp(ssim, -1.0, 1.0);
      pair.status = UnnoticeableFilter(ssim, calibration)
                        ? PairStatus::kFineGrained
                        : PairStatus::kUnnoticeableRejected;
    }
  });

  result.report.ssim_med = calibration.ssim_med;
  for (const auto& bucket : buckets) {
    for (std::size_t i : bucket) {
      const auto& scene = m.Image(pairs[i].image_a).scene_id;
      Tally(result.report.per_scene[scene], pairs[i].status);
      Tally(result.report.total, pairs[i].status);
    }
  }
  result.manifest.Rebuild();
  return result;
}

}  // namespace fgresq
