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

#include "fgresq/sampler.h"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "fgresq/error.h"
#include "fgresq/random.h"

namespace fgresq {

TrainingSet BuildTrainingSet(const DatasetManifest& manifest,
                             const SplitSpec& split, bool include_equal) {
  if (split.train_pair_ids.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "train split is empty");
  }
  TrainingSet set;
  std::set<std::string> image_ids;
  for (const auto& id : split.train_pair_ids) {
    const PairRecord& p = manifest.Pair(id);
    image_ids.insert(p.image_a);
    image_ids.insert(p.image_b);
    double target = 0.5;
    switch (p.preference) {
      case Preference::kA: target = 1.0; break;
      case Preference::kB: target = 0.0; break;
      case Preference::kEqual:
        if (!include_equal) continue;
        target = 0.5;
        break;
      case Preference::kUnlabeled: continue;
    }
    set.pairs.push_back(
        {p.pair_id, &manifest.Image(p.image_a), &manifest.Image(p.image_b), target});
  }
  for (const auto& id : image_ids) {
    const ImageRecord& img = manifest.Image(id);
    if (!img.mos_norm) {
      throw Error(ErrorCode::kUnscoredPair,
                  "training image '" + id + "' has no mos_norm");
    }
    set.images.push_back(&img);
    set.by_scene[img.scene_id].push_back(&img);
  }
  return set;
}

SceneAwareSampler::SceneAwareSampler(const TrainingSet& data,
                                     std::size_t batch_size, std::uint64_t seed)
    : data_(data), batch_size_(batch_size), seed_(seed) {
  if (batch_size_ < 1) {
    throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  }
  bool usable = false;
  for (const auto& [scene, images] : data_.by_scene) {
    usable = usable || images.size() >= 2;
  }
  if (!usable) {
    throw Error(ErrorCode::kEmptyDataset,
                "no scene has at least 2 training samples");
  }
  for (const auto& p : data_.pairs) pairs_by_image_[p.a->image_id].push_back(&p);
}

std::size_t SceneAwareSampler::batches_per_epoch() const {
  std::size_t n = 0;
  for (const auto& [scene, images] : data_.by_scene) {
    n += (images.size() + batch_size_ - 1) / batch_size_;
  }
  return n;
}

std::vector<SceneBatch> SceneAwareSampler::Epoch(std::uint64_t epoch) const {
  std::vector<std::vector<SceneBatch>> per_scene;
  std::uint64_t scene_index = 0;
  for (const auto& [scene, images] : data_.by_scene) {
    Rng rng(DeriveSeed(DeriveSeed(seed_, epoch), scene_index++));
    std::map<std::string, std::vector<const ImageRecord*>> groups;
    for (const ImageRecord* img : images) groups[img->content_id].push_back(img);
    std::vector<std::vector<const ImageRecord*>> ordered;
    for (auto& [content, members] : groups) ordered.push_back(members);
    rng.shuffle(std::span<std::vector<const ImageRecord*>>(ordered));
    std::vector<const ImageRecord*> sequence;
    for (auto& members : ordered) {
      rng.shuffle(std::span<const ImageRecord*>(members));
      sequence.insert(sequence.end(), members.begin(), members.end());
    }

    std::vector<SceneBatch> batches;
    for (std::size_t start = 0; start < sequence.size(); start += batch_size_) {
      SceneBatch batch;
      batch.scene_id = scene;
      const std::size_t end = std::min(sequence.size(), start + batch_size_);
      std::unordered_map<std::string, int> local;
      for (std::size_t i = start; i < end; ++i) {
        local[sequence[i]->image_id] = static_cast<int>(batch.images.size());
        batch.images.push_back(sequence[i]);
        batch.mos.push_back(*sequence[i]->mos_norm);
      }
      for (const ImageRecord* img : batch.images) {
        auto it = pairs_by_image_.find(img->image_id);
        if (it == pairs_by_image_.end()) continue;
        for (const LabeledPair* p : it->second) {
          auto other = local.find(p->b->image_id);
          if (other == local.end()) continue;
          batch.pairs.push_back({local.at(p->a->image_id), other->second, p->target});
        }
      }
      batches.push_back(std::move(batch));
    }
    per_scene.push_back(std::move(batches));
  }

  std::vector<SceneBatch> out;
  for (std::size_t round = 0;; ++round) {
    bool any = false;
    for (auto& batches : per_scene) {
      if (round < batches.size()) {
        out.push_back(std::move(batches[round]));
        any = true;
      }
    }
    if (!any) break;
  }
  return out;
}

}  // namespace fgresq
