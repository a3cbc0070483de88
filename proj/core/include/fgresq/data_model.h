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

// Canonical dataset representation: images, pairs, scenes and splits, plus
// the line-delimited manifest format.
//
// Manifest files hold one JSON object per line. The "record" key tags the
// kind ("image", "pair" or "scene"); the remaining keys are the field names of
// the corresponding struct below. Blank lines are ignored.
//
//   {"record":"scene","scene_id":"pipal","tau_d":0.1,"sample_count":3}
//   {"record":"image","image_id":"a","scene_id":"pipal","content_id":"c0",
//    "task":"denoising","mos_raw":3.1,"mos_norm":0.4,"path":"img/a.ppm"}
//   {"record":"pair","pair_id":"a~b","image_a":"a","image_b":"b",
//    "status":"candidate","preference":"unlabeled","ssim_ab":null}

#ifndef FGRESQ_DATA_MODEL_H_
#define FGRESQ_DATA_MODEL_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fgresq {

enum class Task {
  kDeblurring,
  kDenoising,
  kDeraining,
  kDehazing,
  kSuperResolution,
  kMixture,
};

inline constexpr int kTaskCount = 6;
inline constexpr Task kAllTasks[kTaskCount] = {
    Task::kDeblurring, Task::kDenoising,       Task::kDeraining,
    Task::kDehazing,   Task::kSuperResolution, Task::kMixture};

enum class PairStatus {
  kCandidate,
  kCoarseRejected,
  kUnnoticeableRejected,
  kFineGrained,
};

enum class Preference { kA, kB, kEqual, kUnlabeled };

std::string_view ToString(Task task);
std::string_view ToString(PairStatus status);
std::string_view ToString(Preference preference);
// Display name used in report tables ("Deblurring", ..., "SR", "Mixture").
std::string_view TaskTitle(Task task);
int TaskIndex(Task task);

// Parsers throw Error(kInvalidArgument) on unknown names.
Task ParseTask(std::string_view name);
PairStatus ParsePairStatus(std::string_view name);
Preference ParsePreference(std::string_view name);

struct ImageRecord {
  std::string image_id;
  std::string scene_id;
  std::string content_id;
  Task task = Task::kDenoising;
  std::optional<double> mos_raw;
  // In [0, 1] when present.
  std::optional<double> mos_norm;
  std::string path;

  bool operator==(const ImageRecord&) const = default;
};

struct PairRecord {
  std::string pair_id;
  std::string image_a;
  std::string image_b;
  PairStatus status = PairStatus::kCandidate;
  Preference preference = Preference::kUnlabeled;
  std::optional<double> ssim_ab;

  bool operator==(const PairRecord&) const = default;
};

inline constexpr double kDefaultTauD = 0.1;

struct SceneDescriptor {
  std::string scene_id;
  double tau_d = kDefaultTauD;
  std::int64_t sample_count = 0;

  bool operator==(const SceneDescriptor&) const = default;
};

// Manifests are treated as immutable values once built; Rebuild() refreshes
// the lookup tables after any mutation of the record vectors.
class DatasetManifest {
 public:
  std::vector<ImageRecord> images;
  std::vector<PairRecord> pairs;
  std::vector<SceneDescriptor> scenes;

  // Rebuilds id lookups and checks every type invariant and reference.
  // Throws Error(kIntegrity) or Error(kMalformedManifest).
  void Rebuild();

  const ImageRecord* FindImage(std::string_view image_id) const;
  const PairRecord* FindPair(std::string_view pair_id) const;
  const SceneDescriptor* FindScene(std::string_view scene_id) const;
  // Same as Find* but throw Error(kNotFound).
  const ImageRecord& Image(std::string_view image_id) const;
  const PairRecord& Pair(std::string_view pair_id) const;
  const SceneDescriptor& Scene(std::string_view scene_id) const;

  // Task of a pair, taken from its first member.
  Task PairTask(const PairRecord& pair) const;

  bool operator==(const DatasetManifest& other) const {
    return images == other.images && pairs == other.pairs &&
           scenes == other.scenes;
  }

 private:
  std::unordered_map<std::string, std::size_t> image_index_;
  std::unordered_map<std::string, std::size_t> pair_index_;
  std::unordered_map<std::string, std::size_t> scene_index_;
};

DatasetManifest ReadManifest(std::istream& in);
void WriteManifest(const DatasetManifest& manifest, std::ostream& out);
DatasetManifest LoadManifest(const std::string& path);
void SaveManifest(const DatasetManifest& manifest, const std::string& path);

// Min-max normalization to [0, 1]. A constant input maps to 0.5 everywhere.
// Throws Error(kEmptyScene) for an empty input.
std::vector<double> NormalizeMos(std::span<const double> scores);

// Applies NormalizeMos per scene to every image with a raw score.
DatasetManifest NormalizeManifestMos(const DatasetManifest& manifest);

struct SplitSpec {
  std::vector<std::string> train_pair_ids;  // sorted
  std::vector<std::string> test_pair_ids;   // sorted
  std::uint64_t seed = 0;
  double ratio = 0.8;

  bool operator==(const SplitSpec&) const = default;
};

// Splits the fine-grained pairs so |train| = round(ratio * total), stratified
// by task with largest-remainder apportionment, so every task keeps the ratio
// within one pair. Throws Error(kEmptyDataset) without fine-grained pairs.
SplitSpec SplitByPairs(const DatasetManifest& manifest, double ratio,
                       std::uint64_t seed);

// Number of images that are members of both a train and a test pair.
std::size_t SplitImageLeakage(const DatasetManifest& manifest,
                              const SplitSpec& split);

std::string SplitToJson(const SplitSpec& split);
SplitSpec SplitFromJson(std::string_view json);
SplitSpec LoadSplit(const std::string& path);
void SaveSplit(const SplitSpec& split, const std::string& path);

// Stable identity for a set of test pairs (FNV-1a over the sorted ids), used
// to decide whether two evaluation reports are comparable.
std::string SplitFingerprint(const SplitSpec& split);

// Canonical pair id for two image ids, ordered so the smaller id comes first.
std::string CanonicalPairId(std::string_view a, std::string_view b);

// Reads a whole file; throws Error(kIo).
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

}  // namespace fgresq

#endif  // FGRESQ_DATA_MODEL_H_
