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

#include "fgresq/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "fgresq/error.h"
#include "fgresq/losses.h"

namespace fgresq {

Image ResizeForModel(const FgresqModel& model, const Image& image,
                     const Preprocessing& pre) {
  (void)model;
  if (image.empty()) throw Error(ErrorCode::kEmptyImage, "empty training image");
  return Resize(image, pre.resize, pre.resize);
}

Image RandomCrop(const Image& resized, int crop, Rng& rng) {
  const int max_x = resized.width() - crop;
  const int max_y = resized.height() - crop;
  if (max_x < 0 || max_y < 0) {
    throw Error(ErrorCode::kDimension, "crop larger than image");
  }
  const int x0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_x) + 1));
  const int y0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_y) + 1));
  return Crop(resized, x0, y0, crop, crop);
}

Image CenterCrop(const Image& resized, int crop) {
  const int max_x = resized.width() - crop;
  const int max_y = resized.height() - crop;
  if (max_x < 0 || max_y < 0) {
    throw Error(ErrorCode::kDimension, "crop larger than image");
  }
  return Crop(resized, max_x / 2, max_y / 2, crop, crop);
}

TrainConfig TrainConfig::Toy() { return TrainConfig{}; }

TrainConfig TrainConfig::Paper() {
  TrainConfig c;
  c.max_lr = 5e-6;
  c.batch_size = 64;
  c.epochs = 6;
  c.preprocessing = {256, 224};
  c.alignment_epochs = 5;
  c.alignment_lr = 5e-6;
  return c;
}

void TrainConfig::Validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "loss weights must be non-negative");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be > 0");
  if (!(max_lr > 0.0) || !(alignment_lr > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  }
  if (batch_size < 2) throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 2");
  if (epochs < 0 || alignment_epochs < 0) {
    throw Error(ErrorCode::kInvalidArgument, "epoch counts must be non-negative");
  }
  if (preprocessing.crop < 1 || preprocessing.resize < preprocessing.crop) {
    throw Error(ErrorCode::kInvalidArgument, "resize must be >= crop >= 1");
  }
  if (alignment_groups_per_step < 1) {
    throw Error(ErrorCode::kInvalidArgument, "alignment groups per step must be >= 1");
  }
}

std::string TrainConfigToJson(const TrainConfig& c) {
  return nlohmann::json{{"lambda1", c.lambda1},
                        {"lambda2", c.lambda2},
                        {"epsilon", c.epsilon},
                        {"max_lr", c.max_lr},
                        {"batch_size", c.batch_size},
                        {"epochs", c.epochs},
                        {"resize", c.preprocessing.resize},
                        {"crop", c.preprocessing.crop},
                        {"include_equal", c.include_equal},
                        {"seed", c.seed},
                        {"alignment_epochs", c.alignment_epochs},
                        {"alignment_lr", c.alignment_lr},
                        {"alignment_groups_per_step", c.alignment_groups_per_step},
                        {"adam_beta1", c.adam_beta1},
                        {"adam_beta2", c.adam_beta2},
                        {"adam_epsilon", c.adam_epsilon},
                        {"checkpoint_dir", c.checkpoint_dir},
                        {"checkpoint_every", c.checkpoint_every}}
      .dump();
}

TrainConfig TrainConfigFromJson(std::string_view text) {
  TrainConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.lambda1 = j.value("lambda1", c.lambda1);
    c.lambda2 = j.value("lambda2", c.lambda2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.max_lr = j.value("max_lr", c.max_lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.preprocessing.resize = j.value("resize", c.preprocessing.resize);
    c.preprocessing.crop = j.value("crop", c.preprocessing.crop);
    c.include_equal = j.value("include_equal", c.include_equal);
    c.seed = j.value("seed", c.seed);
    c.alignment_epochs = j.value("alignment_epochs", c.alignment_epochs);
    c.alignment_lr = j.value("alignment_lr", c.alignment_lr);
    c.alignment_groups_per_step = j.value("alignment_groups_per_step", c.alignment_groups_per_step);
    c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
    c.checkpoint_dir = j.value("checkpoint_dir", c.checkpoint_dir);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed train config: ") + e.what());
  }
  return c;
}

double CosineLearningRate(double max_lr, std::int64_t step,
                          std::int64_t total_steps) {
  if (total_steps <= 1) return max_lr;
  const double s = std::clamp<double>(static_cast<double>(step), 0.0,
                                      static_cast<double>(total_steps - 1));
  return 0.5 * max_lr *
         (1.0 + std::cos(std::numbers::pi * s / static_cast<double>(total_steps - 1)));
}

AdamOptimizer::AdamOptimizer(ParameterStore& params, double beta1, double beta2,
                             double epsilon)
    : params_(params), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& p : params_.all()) {
    m_.push_back(ad::Matrix::Zero(p.var.rows(), p.var.cols()));
    v_.push_back(ad::Matrix::Zero(p.var.rows(), p.var.cols()));
  }
}

void AdamOptimizer::Step(double lr) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto all = params_.all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    ad::Node& node = all[i].var.node();
    if (!all[i].trainable || node.grad.size() == 0) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * node.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * node.grad.cwiseProduct(node.grad);
    node.value.array() -= lr * (m_[i].array() / c1) /
                          ((v_[i].array() / c2).sqrt() + epsilon_);
  }
  params_.ZeroGrad();
}

ObjectiveValue ComputeObjective(ad::Tape& t, const FgresqModel& model,
                                const ObjectiveBatch& batch,
                                const TrainConfig& config) {
  const FusedBatch fused = model.Forward(t, batch.patches);
  const ad::Var scores = model.PredictScore(t, fused.f_q);

  ObjectiveValue out;
  ad::Var scene_sum;
  for (const auto& scene : batch.scenes) {
    if (scene.rows.size() < 2) continue;
    const ad::Var pred = ad::GatherRows(t, scores, scene.rows);
    const ad::Var l = ad::Scale(
        t, FidelityLossScene(t, pred, scene.mos, config.epsilon), scene.weight);
    scene_sum = scene_sum ? ad::Add(t, scene_sum, l) : l;
  }
  ad::Var rank;
  if (!batch.pair_a.empty()) {
    const ad::Var qa = ad::GatherRows(t, fused.f_q, batch.pair_a);
    const ad::Var qb = ad::GatherRows(t, fused.f_q, batch.pair_b);
    rank = RankingLossFromLogits(t, model.PreferenceLogit(t, qa, qb),
                                 batch.pair_target);
  }
  out.scene = scene_sum ? scene_sum.scalar() : 0.0;
  out.rank = rank ? rank.scalar() : 0.0;
  ad::Var total;
  if (scene_sum) total = ad::Scale(t, scene_sum, config.lambda1);
  if (rank) {
    const ad::Var r = ad::Scale(t, rank, config.lambda2);
    total = total ? ad::Add(t, total, r) : r;
  }
  out.total = total ? total : ad::Constant(ad::Matrix::Zero(1, 1));
  return out;
}

ImageCache::ImageCache(const FgresqModel& model, ImageLoader loader,
                       Preprocessing pre)
    : model_(model), loader_(std::move(loader)), pre_(pre) {}

const Image& ImageCache::Get(const ImageRecord& record) {
  auto it = cache_.find(record.image_id);
  if (it != cache_.end()) return it->second;
  Image resized = ResizeForModel(model_, loader_(record), pre_);
  return cache_.emplace(record.image_id, std::move(resized)).first->second;
}

namespace {

std::vector<std::vector<const ImageRecord*>> AlignmentGroups(
    std::span<const ImageRecord* const> images, Rng& rng) {
  std::array<std::vector<const ImageRecord*>, kTaskCount> by_task;
  for (const ImageRecord* r : images) by_task[TaskIndex(r->task)].push_back(r);
  for (auto& v : by_task) rng.shuffle(std::span(v));
  std::vector<std::vector<const ImageRecord*>> groups;
  std::array<std::size_t, kTaskCount> next{};
  while (true) {
    std::vector<const ImageRecord*> g;
    for (int k = 0; k < kTaskCount; ++k) {
      if (next[k] < by_task[k].size()) g.push_back(by_task[k][next[k]++]);
    }
    if (g.size() < 2) break;
    groups.push_back(std::move(g));
  }
  return groups;
}

int DistinctTasks(std::span<const ImageRecord* const> images) {
  std::array<bool, kTaskCount> seen{};
  for (const ImageRecord* r : images) seen[TaskIndex(r->task)] = true;
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

bool Finite(double v) { return std::isfinite(v); }

std::string CheckpointId(std::uint64_t seed, std::int64_t epoch) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "run-%016llx-e%03lld",
                static_cast<unsigned long long>(seed),
                static_cast<long long>(epoch));
  return buf;
}

}  // namespace

std::vector<AlignmentRecord> TrainAlignment(FgresqModel& model,
                                            std::span<const ImageRecord* const> images,
                                            ImageCache& cache,
                                            const TrainConfig& config) {
  std::vector<AlignmentRecord> curve;
  if (config.alignment_epochs == 0 || DistinctTasks(images) < 2) return curve;

  Rng probe(DeriveSeed(config.seed, 0xa1));
  const std::size_t groups_per_epoch = AlignmentGroups(images, probe).size();
  const std::size_t steps_per_epoch =
      (groups_per_epoch + config.alignment_groups_per_step - 1) /
      config.alignment_groups_per_step;
  const auto total =
      static_cast<std::int64_t>(steps_per_epoch) * config.alignment_epochs;

  AdamOptimizer adam(model.parameters(), config.adam_beta1, config.adam_beta2,
                     config.adam_epsilon);
  const int crop = config.preprocessing.crop;
  std::int64_t step = 0;
  const auto snapshot = SnapshotParameters(model);
  for (int epoch = 0; epoch < config.alignment_epochs; ++epoch) {
    Rng rng(DeriveSeed(DeriveSeed(config.seed, 0xa1), static_cast<std::uint64_t>(epoch)));
    const auto groups = AlignmentGroups(images, rng);
    for (std::size_t g0 = 0; g0 < groups.size();
         g0 += config.alignment_groups_per_step) {
      const std::size_t g1 =
          std::min(groups.size(), g0 + config.alignment_groups_per_step);
      ad::Tape t;
      ad::Var sum;
      Rng crop_rng(DeriveSeed(DeriveSeed(config.seed, 0xc1), static_cast<std::uint64_t>(step)));
      for (std::size_t g = g0; g < g1; ++g) {
        std::vector<Image> batch;
        ad::Matrix text(static_cast<Eigen::Index>(groups[g].size()),
                        model.text_anchors().cols());
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
          batch.push_back(model.PrepareInput(
              RandomCrop(cache.Get(*groups[g][i]), crop, crop_rng)));
          text.row(static_cast<Eigen::Index>(i)) =
              model.text_anchors().row(TaskIndex(groups[g][i]->task));
        }
        const ad::Var f_d = model.EncodeDegradation(t, model.Patchify(batch));
        const ad::Var l = ContrastiveAlignmentLoss(t, f_d, ad::Constant(text),
                                                   model.LogitScale(t));
        sum = sum ? ad::Add(t, sum, l) : l;
      }
      const ad::Var loss = ad::Scale(t, sum, 1.0 / static_cast<double>(g1 - g0));
      const double lr = CosineLearningRate(config.alignment_lr, step, total);
      if (!Finite(loss.scalar())) {
        RestoreParameters(model, snapshot);
        throw Error(ErrorCode::kDivergence,
                    "non-finite alignment loss at step " + std::to_string(step));
      }
      t.Backward(loss);
      adam.Step(lr);
      curve.push_back({step, loss.scalar(), lr});
      ++step;
    }
  }
  return curve;
}

TrainResult Train(FgresqModel& model, const DatasetManifest& manifest,
                  const SplitSpec& split, const ImageLoader& loader,
                  const TrainConfig& config, const ProgressFn& progress) {
  config.Validate();
  if (config.preprocessing.crop != model.config().image_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "crop size must equal the model input size");
  }
  const TrainingSet data = BuildTrainingSet(manifest, split, config.include_equal);
  ImageCache cache(model, loader, config.preprocessing);
  TrainResult result;

  if (model.config().dfl_enabled) {
    model.SetDegradationTrainable(true);
    result.alignment_curve = TrainAlignment(model, data.images, cache, config);
    model.SetDegradationTrainable(false);
  }

  SceneAwareSampler sampler(data, config.batch_size, config.seed);
  const std::size_t batches_per_epoch = sampler.batches_per_epoch();
  const auto total = static_cast<std::int64_t>(batches_per_epoch) * config.epochs;

  // Per-batch scene multiplier so that an epoch's sum equals the
  // inverse-count weighted sum of per-scene mean losses.
  std::vector<std::int64_t> counts;
  std::map<std::string, double> scene_weight;
  for (const auto& [scene, images] : data.by_scene) {
    counts.push_back(static_cast<std::int64_t>(images.size()));
  }
  const auto w = InverseCountWeights(counts);
  std::map<std::string, std::size_t> scene_batches;
  for (const auto& b : sampler.Epoch(0)) ++scene_batches[b.scene_id];
  {
    std::size_t i = 0;
    for (const auto& [scene, images] : data.by_scene) {
      const std::size_t nb = std::max<std::size_t>(scene_batches[scene], 1);
      scene_weight[scene] = w[i++] * static_cast<double>(batches_per_epoch) /
                            static_cast<double>(nb);
    }
  }

  AdamOptimizer adam(model.parameters(), config.adam_beta1, config.adam_beta2,
                     config.adam_epsilon);
  if (!config.checkpoint_dir.empty()) {
    std::filesystem::create_directories(config.checkpoint_dir);
  }
  const int crop = config.preprocessing.crop;
  auto last_good = SnapshotParameters(model);
  std::int64_t step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const SceneBatch& sb : sampler.Epoch(static_cast<std::uint64_t>(epoch))) {
      Rng crop_rng(DeriveSeed(DeriveSeed(config.seed, 0xc2), static_cast<std::uint64_t>(step)));
      std::vector<Image> images;
      images.reserve(sb.images.size());
      for (const ImageRecord* r : sb.images) {
        images.push_back(model.PrepareInput(RandomCrop(cache.Get(*r), crop, crop_rng)));
      }
      ObjectiveBatch batch;
      batch.patches = model.Patchify(images);
      ObjectiveBatch::Scene scene;
      for (std::size_t i = 0; i < sb.images.size(); ++i) {
        scene.rows.push_back(static_cast<Eigen::Index>(i));
      }
      scene.mos = sb.mos;
      scene.weight = scene_weight.at(sb.scene_id);
      batch.scenes.push_back(std::move(scene));
      for (const auto& p : sb.pairs) {
        batch.pair_a.push_back(p.a);
        batch.pair_b.push_back(p.b);
        batch.pair_target.push_back(p.target);
      }

      ad::Tape t;
      const ObjectiveValue obj = ComputeObjective(t, model, batch, config);
      const double lr = CosineLearningRate(config.max_lr, step, total);
      if (!Finite(obj.total.scalar())) {
        RestoreParameters(model, last_good);
        throw Error(ErrorCode::kDivergence,
                    "non-finite loss at step " + std::to_string(step) +
                        "; parameters restored to the end of epoch " +
                        std::to_string(epoch - 1));
      }
      if (obj.total.requires_grad()) {
        t.Backward(obj.total);
        adam.Step(lr);
      } else {
        model.parameters().ZeroGrad();
      }
      LossRecord rec{step, epoch, obj.scene, obj.rank, obj.total.scalar(), lr};
      result.curve.push_back(rec);
      if (progress) progress(rec);
      ++step;
    }
    last_good = SnapshotParameters(model);
    const bool last = epoch + 1 == config.epochs;
    if (!config.checkpoint_dir.empty() &&
        (last || (config.checkpoint_every > 0 &&
                  (epoch + 1) % config.checkpoint_every == 0))) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03d.json", epoch + 1);
      const std::string path =
          (std::filesystem::path(config.checkpoint_dir) / name).string();
      SaveCheckpoint(model, {CheckpointId(config.seed, epoch + 1), epoch + 1, step},
                     path);
      result.checkpoints.push_back(path);
    }
  }
  if (!config.checkpoint_dir.empty()) {
    const std::string path =
        (std::filesystem::path(config.checkpoint_dir) / "final.json").string();
    SaveCheckpoint(model, {CheckpointId(config.seed, config.epochs), config.epochs, step},
                   path);
    result.checkpoints.push_back(path);
  }
  result.steps = step;
  return result;
}

std::string LossCurveToCsv(std::span<const LossRecord> curve) {
  std::ostringstream os;
  os.precision(10);
  os << "step,l_scene,l_rank,l_total,lr\n";
  for (const auto& r : curve) {
    os << r.step << ',' << r.l_scene << ',' << r.l_rank << ',' << r.l_total << ','
       << r.lr << '\n';
  }
  return os.str();
}

}  // namespace fgresq
