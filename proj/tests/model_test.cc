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

#include "fgresq/model.h"

#include <gtest/gtest.h>

#include <filesystem>

#include "fgresq/error.h"
#include "fgresq/sampler.h"
#include "fgresq/synthetic.h"
#include "fgresq/text_anchors.h"
#include "fixtures.h"

namespace fgresq {
namespace {

std::vector<Image> Images(int n, int size, std::uint64_t seed) {
  std::vector<Image> out;
  for (int i = 0; i < n; ++i) out.push_back(SyntheticContent(size, seed + i));
  return out;
}

TEST(Model, SameSeedSameFeatures) {
  const ModelConfig c = testing::TinyConfig(5);
  const FgresqModel a(c), b(c);
  const auto imgs = Images(3, 8, 1);
  const auto fa = a.Features(imgs);
  const auto fb = b.Features(imgs);
  for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(fa[i].f_q, fb[i].f_q);
  ModelConfig other = c;
  other.seed = 6;
  EXPECT_NE(FgresqModel(other).Features(imgs)[0].f_q, fa[0].f_q);
}

TEST(Model, FusedFeatureLayout) {
  const ModelConfig c = testing::TinyConfig();
  const FgresqModel m(c);
  const int d = c.feature_dim;
  for (const auto& f : m.Features(Images(2, 8, 3))) {
    ASSERT_EQ(f.f_q.size(), 3 * d);
    EXPECT_EQ(f.f_q.head(d), f.f_g);
    EXPECT_EQ(f.f_q.segment(d, d), f.f_p);
    EXPECT_TRUE(f.f_q.tail(d).isApprox(f.f_g + f.f_p, 1e-12));
    EXPECT_NEAR(f.prompt_weights.sum(), 1.0, 1e-12);
    EXPECT_TRUE((f.prompt_weights.array() >= 0).all());
    EXPECT_NEAR(f.f_d.norm(), 1.0, 1e-12);
  }
}

TEST(Model, DisabledDegradationBranchZeroesPromptFeature) {
  ModelConfig c = testing::TinyConfig();
  c.dfl_enabled = false;
  const FgresqModel m(c);
  const int d = c.feature_dim;
  for (const auto& f : m.Features(Images(2, 8, 4))) {
    EXPECT_TRUE(f.f_q.segment(d, d).isZero(0));
    EXPECT_EQ(f.f_q.tail(d), f.f_g);
    EXPECT_EQ(f.f_d.size(), 0);
  }
}

TEST(Model, SinglePromptHasUnitWeight) {
  ModelConfig c = testing::TinyConfig();
  c.prompt_count = 1;
  const FgresqModel m(c);
  for (const auto& f : m.Features(Images(2, 8, 5))) {
    ASSERT_EQ(f.prompt_weights.size(), 1);
    EXPECT_DOUBLE_EQ(f.prompt_weights(0), 1.0);
  }
}

TEST(Model, PreferenceIsAntisymmetric) {
  const FgresqModel m(testing::TinyConfig());
  const auto f = m.Features(Images(2, 8, 6));
  EXPECT_NEAR(m.PredictPreference(f[0], f[1]) + m.PredictPreference(f[1], f[0]), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(m.PredictPreference(f[0], f[0]), 0.5);
}

TEST(Model, AnchorsAreUnitNorm) {
  const FgresqModel m(testing::TinyConfig());
  const auto& a = m.text_anchors();
  ASSERT_EQ(a.rows(), static_cast<Eigen::Index>(kTaskCount));
  for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_NEAR(a.row(i).norm(), 1.0, 1e-12);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    EXPECT_EQ(m.NearestAnchor(a.row(i).transpose()), static_cast<int>(i));
  }
}

TEST(Model, ConfigValidation) {
  ModelConfig c = testing::TinyConfig();
  c.feature_dim = 4;
  EXPECT_THROW(c.Validate(), Error);
  c = testing::TinyConfig();
  c.prompt_count = 0;
  EXPECT_THROW(FgresqModel{c}, Error);
  c = testing::TinyConfig();
  c.patch_size = 3;
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_NO_THROW(ModelConfig::Paper().Validate());
  EXPECT_EQ(ModelConfigFromJson(ModelConfigToJson(c)), c);
}

TEST(Model, PatchifyRejectsWrongSize) {
  const FgresqModel m(testing::TinyConfig());
  const std::vector<Image> wrong = {Image(9, 8, 3)};
  EXPECT_THROW(m.Patchify(wrong), Error);
}

TEST(Checkpoint, RoundTripReproducesPredictions) {
  const FgresqModel m(testing::TinyConfig(8));
  const auto path = std::filesystem::temp_directory_path() / "fgresq_model_test_ckpt.json";
  SaveCheckpoint(m, {"ckpt-x", 3, 40}, path.string());
  CheckpointMetadata meta;
  const auto loaded = LoadCheckpoint(path.string(), &meta);
  EXPECT_EQ(meta.checkpoint_id, "ckpt-x");
  EXPECT_EQ(meta.epoch, 3);
  EXPECT_EQ(meta.step, 40);
  EXPECT_EQ(loaded->config(), m.config());
  const auto imgs = Images(3, 8, 9);
  const auto a = m.Features(imgs);
  const auto b = loaded->Features(imgs);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(m.PredictScore(a[i]), loaded->PredictScore(b[i]));
  }
  std::filesystem::remove(path);
}

TEST(Checkpoint, MalformedIsRejected) {
  try {
    CheckpointFromJson("{\"version\":1}", nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedCheckpoint);
  }
  EXPECT_THROW(CheckpointFromJson("not json", nullptr), Error);
}

TEST(Checkpoint, SnapshotRestore) {
  FgresqModel m(testing::TinyConfig());
  const auto snap = SnapshotParameters(m);
  m.parameters().all()[0].var.node().value.setZero();
  RestoreParameters(m, snap);
  EXPECT_EQ(m.parameters().all()[0].var.value(), snap[0]);
}

TEST(Parameters, FreezeByPrefix) {
  FgresqModel m(testing::TinyConfig());
  const std::size_t before = m.parameters().trainable_count();
  m.SetDegradationTrainable(false);
  EXPECT_LT(m.parameters().trainable_count(), before);
  m.SetDegradationTrainable(true);
  EXPECT_EQ(m.parameters().trainable_count(), before);
}

SyntheticDataset SamplerData(std::vector<Task> tasks, int contents, int per_content) {
  SyntheticDatasetOptions o;
  o.tasks = std::move(tasks);
  o.contents_per_task = contents;
  o.images_per_content = per_content;
  o.image_size = 8;
  o.seed = 2;
  return BuildSyntheticDataset(o);
}

TEST(Sampler, OneBatchPerSceneWhenTheyFit) {
  const auto ds = SamplerData({Task::kDeblurring, Task::kDenoising}, 2, 2);
  const TrainingSet set = BuildTrainingSet(ds.manifest, testing::AllTrainSplit(ds.manifest));
  const SceneAwareSampler s(set, 4, 1);
  const auto batches = s.Epoch(0);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(s.batches_per_epoch(), 2u);
  EXPECT_NE(batches[0].scene_id, batches[1].scene_id);
  for (const auto& b : batches) {
    EXPECT_EQ(b.images.size(), 4u);
    for (const auto* img : b.images) EXPECT_EQ(img->scene_id, b.scene_id);
    EXPECT_EQ(b.pairs.size(), 2u);
  }
}

TEST(Sampler, RemainderBatch) {
  const auto ds = SamplerData({Task::kDenoising}, 1, 5);
  const TrainingSet set = BuildTrainingSet(ds.manifest, testing::AllTrainSplit(ds.manifest));
  const auto batches = SceneAwareSampler(set, 4, 1).Epoch(0);
  ASSERT_EQ(batches.size(), 2u);
  EXPECT_EQ(batches[0].images.size(), 4u);
  EXPECT_EQ(batches[1].images.size(), 1u);
}

TEST(Sampler, SeededAndEpochDependent) {
  const auto ds = SamplerData({Task::kDenoising}, 4, 3);
  const TrainingSet set = BuildTrainingSet(ds.manifest, testing::AllTrainSplit(ds.manifest));
  const SceneAwareSampler s(set, 6, 9);
  auto ids = [](const std::vector<SceneBatch>& bs) {
    std::vector<std::string> out;
    for (const auto& b : bs) {
      for (const auto* img : b.images) out.push_back(img->image_id);
    }
    return out;
  };
  EXPECT_EQ(ids(s.Epoch(3)), ids(SceneAwareSampler(set, 6, 9).Epoch(3)));
  std::vector<std::string> e0 = ids(s.Epoch(0)), e1 = ids(s.Epoch(1));
  EXPECT_NE(e0, e1);
  std::sort(e0.begin(), e0.end());
  std::sort(e1.begin(), e1.end());
  EXPECT_EQ(e0, e1);
}

TEST(Sampler, EqualPairsCanBeExcluded) {
  auto ds = SamplerData({Task::kDenoising}, 1, 3);
  ds.manifest.pairs[0].preference = Preference::kEqual;
  ds.manifest.Rebuild();
  const SplitSpec split = testing::AllTrainSplit(ds.manifest);
  EXPECT_EQ(BuildTrainingSet(ds.manifest, split, true).pairs.size(), 3u);
  EXPECT_EQ(BuildTrainingSet(ds.manifest, split, false).pairs.size(), 2u);
  const auto pairs = BuildTrainingSet(ds.manifest, split, true).pairs;
  EXPECT_EQ(std::count_if(pairs.begin(), pairs.end(),
                          [](const LabeledPair& p) { return p.target == 0.5; }),
            1);
}

}  // namespace
}  // namespace fgresq
