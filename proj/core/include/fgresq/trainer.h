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

// Two-stage optimization: contrastive alignment of the degradation encoder to
// the frozen text anchors, then the dual-branch objective
//   L_total = lambda1 * L_scene + lambda2 * L_rank
// with the degradation encoder frozen. Adam with a cosine-annealed rate.

#ifndef FGRESQ_TRAINER_H_
#define FGRESQ_TRAINER_H_

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fgresq/autodiff.h"
#include "fgresq/data_model.h"
#include "fgresq/filtration.h"
#include "fgresq/image.h"
#include "fgresq/model.h"
#include "fgresq/random.h"
#include "fgresq/sampler.h"

namespace fgresq {

struct Preprocessing {
  int resize = 72;
  int crop = 64;
};

// Resize to resize x resize (channel conversion per the model config).
Image ResizeForModel(const FgresqModel& model, const Image& image,
                     const Preprocessing& pre);
Image RandomCrop(const Image& resized, int crop, Rng& rng);
Image CenterCrop(const Image& resized, int crop);

struct TrainConfig {
  double lambda1 = 5.0;
  double lambda2 = 1.0;
  double epsilon = 1e-8;
  double max_lr = 1e-3;
  std::size_t batch_size = 16;
  int epochs = 200;
  Preprocessing preprocessing;
  bool include_equal = true;
  std::uint64_t seed = 0;

  // Alignment stage (skipped when dfl is disabled).
  int alignment_epochs = 30;
  double alignment_lr = 1e-3;
  std::size_t alignment_groups_per_step = 4;

  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  // Empty means no checkpoint files.
  std::string checkpoint_dir;
  int checkpoint_every = 1;

  static TrainConfig Toy();
  static TrainConfig Paper();
  // Throws Error(kInvalidArgument) for negative lambdas or epsilon <= 0.
  void Validate() const;
};

// Flat JSON object; missing keys keep the toy defaults.
std::string TrainConfigToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(std::string_view json);

double CosineLearningRate(double max_lr, std::int64_t step,
                          std::int64_t total_steps);

class AdamOptimizer {
 public:
  AdamOptimizer(ParameterStore& params, double beta1, double beta2,
                double epsilon);
  // Updates every trainable parameter that received a gradient, then clears
  // all gradients.
  void Step(double lr);

 private:
  ParameterStore& params_;
  double beta1_;
  double beta2_;
  double epsilon_;
  std::int64_t t_ = 0;
  std::vector<ad::Matrix> m_;
  std::vector<ad::Matrix> v_;
};

// A batch ready for the objective: patches for n images, scene segments with
// per-scene weights, and labelled pairs by local index.
struct ObjectiveBatch {
  ad::Matrix patches;
  struct Scene {
    std::vector<Eigen::Index> rows;
    std::vector<double> mos;
    double weight = 1.0;
  };
  std::vector<Scene> scenes;
  std::vector<Eigen::Index> pair_a;
  std::vector<Eigen::Index> pair_b;
  std::vector<double> pair_target;
};

struct ObjectiveValue {
  ad::Var total;
  double scene = 0.0;
  double rank = 0.0;
};

// Scenes with fewer than 2 rows and an empty pair list contribute 0.
ObjectiveValue ComputeObjective(ad::Tape& t, const FgresqModel& model,
                                const ObjectiveBatch& batch,
                                const TrainConfig& config);

struct LossRecord {
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  double l_scene = 0.0;
  double l_rank = 0.0;
  double l_total = 0.0;
  double lr = 0.0;
};

struct AlignmentRecord {
  std::int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  std::vector<AlignmentRecord> alignment_curve;
  std::vector<LossRecord> curve;
  std::vector<std::string> checkpoints;
  std::int64_t steps = 0;
};

// Loads and resizes images once per id.
class ImageCache {
 public:
  ImageCache(const FgresqModel& model, ImageLoader loader, Preprocessing pre);
  const Image& Get(const ImageRecord& record);

 private:
  const FgresqModel& model_;
  ImageLoader loader_;
  Preprocessing pre_;
  std::map<std::string, Image> cache_;
};

// Contrastive alignment stage alone. Each group holds at most one image per
// task so text rows within a group are distinct.
std::vector<AlignmentRecord> TrainAlignment(FgresqModel& model,
                                            std::span<const ImageRecord* const> images,
                                            ImageCache& cache,
                                            const TrainConfig& config);

using ProgressFn = std::function<void(const LossRecord&)>;

// Full two-stage run. On a non-finite loss the parameters are restored to the
// last good epoch and Error(kDivergence) is thrown.
TrainResult Train(FgresqModel& model, const DatasetManifest& manifest,
                  const SplitSpec& split, const ImageLoader& loader,
                  const TrainConfig& config, const ProgressFn& progress = {});

// "step,l_scene,l_rank,l_total,lr" CSV.
std::string LossCurveToCsv(std::span<const LossRecord> curve);

}  // namespace fgresq

#endif  // FGRESQ_TRAINER_H_
