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

#ifndef FGRESQ_SAMPLER_H_
#define FGRESQ_SAMPLER_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fgresq/data_model.h"

namespace fgresq {

// A labelled training pair; target 1 means A is better, 0 means B, 0.5 equal.
struct LabeledPair {
  std::string pair_id;
  const ImageRecord* a = nullptr;
  const ImageRecord* b = nullptr;
  double target = 0.5;
};

// Training images are the members of train-split pairs ("images follow their
// pair"); all must carry mos_norm.
struct TrainingSet {
  std::vector<const ImageRecord*> images;  // sorted by image_id
  std::map<std::string, std::vector<const ImageRecord*>> by_scene;
  std::vector<LabeledPair> pairs;
};

// Throws Error(kEmptyDataset) for an empty train split and
// Error(kUnscoredPair) when a training image has no mos_norm.
TrainingSet BuildTrainingSet(const DatasetManifest& manifest,
                             const SplitSpec& split, bool include_equal = true);

struct SceneBatch {
  std::string scene_id;
  std::vector<const ImageRecord*> images;
  std::vector<double> mos;  // mos_norm, aligned with images
  struct Pair {
    int a = 0;  // indices into images
    int b = 0;
    double target = 0.5;
  };
  std::vector<Pair> pairs;  // training pairs with both members in the batch
};

// Single-scene batches. Within a scene, content groups are shuffled and kept
// contiguous (so most labelled pairs land in one batch), then chunked; the
// last batch of a scene may be short. Scenes are interleaved round-robin in
// scene_id order. The sequence depends only on (seed, epoch).
class SceneAwareSampler {
 public:
  // Throws Error(kEmptyDataset) unless some scene has at least 2 samples.
  SceneAwareSampler(const TrainingSet& data, std::size_t batch_size,
                    std::uint64_t seed);

  std::vector<SceneBatch> Epoch(std::uint64_t epoch) const;

  std::size_t batches_per_epoch() const;

 private:
  const TrainingSet& data_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::map<std::string, std::vector<const LabeledPair*>> pairs_by_image_;
};

}  // namespace fgresq

#endif  // FGRESQ_SAMPLER_H_
