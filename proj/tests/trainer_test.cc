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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "fgresq/error.h"
#include "fgresq/synthetic.h"
#include "fixtures.h"

namespace fgresq {
namespace {

SyntheticDataset SmallData() {
  SyntheticDatasetOptions o;
  o.tasks = {Task::kDeblurring, Task::kDenoising};
  o.contents_per_task = 2;
  o.images_per_content = 3;
  o.image_size = 10;
  o.seed = 4;
  return BuildSyntheticDataset(o);
}

TrainConfig SmallConfig() {
  TrainConfig c;
  c.epochs = 2;
  c.alignment_epochs = 1;
  c.batch_size = 6;
  c.preprocessing = {10, 8};
  c.seed = 1;
  return c;
}

TEST(Schedule, CosineEndpoints) {
  EXPECT_DOUBLE_EQ(CosineLearningRate(1e-3, 0, 10), 1e-3);
  EXPECT_NEAR(CosineLearningRate(1e-3, 9, 10), 0.0, 1e-18);
  EXPECT_NEAR(CosineLearningRate(1e-3, 3, 7), 0.5e-3, 1e-15);
  EXPECT_DOUBLE_EQ(CosineLearningRate(2e-3, 0, 1), 2e-3);
  for (int s = 1; s < 10; ++s) {
    EXPECT_LE(CosineLearningRate(1.0, s, 10), CosineLearningRate(1.0, s - 1, 10));
  }
}

TEST(Config, PresetsAndValidation) {
  EXPECT_NO_THROW(TrainConfig::Toy().Validate());
  const TrainConfig paper = TrainConfig::Paper();
  EXPECT_EQ(paper.batch_size, 64u);
  EXPECT_EQ(paper.epochs, 6);
  EXPECT_EQ(paper.preprocessing.crop, 224);
  TrainConfig bad;
  bad.batch_size = 1;
  EXPECT_THROW(bad.Validate(), Error);
  bad = TrainConfig();
  bad.preprocessing = {32, 64};
  EXPECT_THROW(bad.Validate(), Error);
  bad = TrainConfig();
  bad.lambda1 = -1;
  EXPECT_THROW(bad.Validate(), Error);
}

TEST(Config, JsonRoundTrip) {
  TrainConfig c = SmallConfig();
  c.max_lr = 3e-4;
  c.include_equal = false;
  const TrainConfig back = TrainConfigFromJson(TrainConfigToJson(c));
  EXPECT_EQ(back.max_lr, c.max_lr);
  EXPECT_EQ(back.include_equal, false);
  EXPECT_EQ(back.preprocessing.resize, 10);
  EXPECT_EQ(back.preprocessing.crop, 8);
  EXPECT_EQ(back.batch_size, 6u);
}

TEST(Crops, CenterAndRandomStayInside) {
  Image img(6, 6, 1);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) img.at(x, y) = static_cast<float>(10 * y + x);
  }
  const Image c = CenterCrop(img, 4);
  EXPECT_EQ(c.at(0, 0), 11.0f);
  EXPECT_EQ(c.at(3, 3), 44.0f);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Image r = RandomCrop(img, 4, rng);
    EXPECT_EQ(r.width(), 4);
    const float corner = r.at(0, 0);
    EXPECT_LE(corner, 22.0f);
    EXPECT_EQ(r.at(3, 3), corner + 33.0f);
  }
}

TEST(Adam, SkipsFrozenParameters) {
  FgresqModel m(testing::TinyConfig());
  m.SetDegradationTrainable(false);
  const auto before = SnapshotParameters(m);
  for (auto& p : m.parameters().all()) p.var.node().Accumulate(ad::Matrix::Ones(p.var.rows(), p.var.cols()));
  AdamOptimizer(m.parameters(), 0.9, 0.999, 1e-8).Step(0.1);
  const auto after = SnapshotParameters(m);
  int changed = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto& p = m.parameters().all()[i];
    if (!p.trainable) {
      EXPECT_EQ(after[i], before[i]) << p.name;
    } else {
      changed += after[i] != before[i];
      EXPECT_EQ(p.var.grad().size(), 0) << p.name;
    }
  }
  EXPECT_GT(changed, 0);
}

TEST(Objective, WeightsCombineComponents) {
  const ModelConfig mc = testing::TinyConfig();
  const FgresqModel m(mc);
  const ObjectiveBatch batch = testing::GradientCheckBatch(mc, 2);
  TrainConfig c;
  c.lambda1 = 2.0;
  c.lambda2 = 3.0;
  ad::Tape t(false);
  const ObjectiveValue v = ComputeObjective(t, m, batch, c);
  EXPECT_NEAR(v.total.scalar(), 2.0 * v.scene + 3.0 * v.rank, 1e-12);
  EXPECT_GT(v.scene, 0.0);
  EXPECT_GT(v.rank, 0.0);
}

TEST(Train, ZeroEpochsLeavesParametersUnchanged) {
  const auto ds = SmallData();
  FgresqModel m(testing::TinyConfig());
  const auto before = SnapshotParameters(m);
  TrainConfig c = SmallConfig();
  c.epochs = 0;
  c.alignment_epochs = 0;
  const TrainResult r = Train(m, ds.manifest, testing::AllTrainSplit(ds.manifest), InMemoryLoader(ds), c);
  EXPECT_EQ(r.steps, 0);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_EQ(SnapshotParameters(m), before);
}

TEST(Train, DegradationEncoderFrozenAfterAlignment) {
  const auto ds = SmallData();
  FgresqModel m(testing::TinyConfig());
  TrainConfig c = SmallConfig();
  c.alignment_epochs = 0;
  const auto before = SnapshotParameters(m);
  const TrainResult r = Train(m, ds.manifest, testing::AllTrainSplit(ds.manifest), InMemoryLoader(ds), c);
  EXPECT_GT(r.steps, 0);
  const auto after = SnapshotParameters(m);
  bool any_changed = false;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const std::string& name = m.parameters().all()[i].name;
    if (name.rfind("degradation", 0) == 0) {
      EXPECT_EQ(after[i], before[i]) << name;
    } else {
      any_changed |= after[i] != before[i];
    }
  }
  EXPECT_TRUE(any_changed);
}

TEST(Train, DeterministicForASeed) {
  const auto ds = SmallData();
  const SplitSpec split = testing::AllTrainSplit(ds.manifest);
  FgresqModel a(testing::TinyConfig()), b(testing::TinyConfig());
  const auto ra = Train(a, ds.manifest, split, InMemoryLoader(ds), SmallConfig());
  const auto rb = Train(b, ds.manifest, split, InMemoryLoader(ds), SmallConfig());
  EXPECT_EQ(SnapshotParameters(a), SnapshotParameters(b));
  ASSERT_EQ(ra.curve.size(), rb.curve.size());
  for (std::size_t i = 0; i < ra.curve.size(); ++i) EXPECT_EQ(ra.curve[i].l_total, rb.curve[i].l_total);
  EXPECT_FALSE(ra.alignment_curve.empty());
}

TEST(Train, NonFiniteLossRestoresParameters) {
  auto ds = SmallData();
  ds.images.begin()->second.at(2, 2) = std::numeric_limits<float>::quiet_NaN();
  FgresqModel m(testing::TinyConfig());
  const auto before = SnapshotParameters(m);
  TrainConfig c = SmallConfig();
  c.alignment_epochs = 0;
  try {
    Train(m, ds.manifest, testing::AllTrainSplit(ds.manifest), InMemoryLoader(ds), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
  }
  EXPECT_EQ(SnapshotParameters(m), before);
}

TEST(Train, RejectsMismatchedCrop) {
  const auto ds = SmallData();
  FgresqModel m(testing::TinyConfig());
  TrainConfig c = SmallConfig();
  c.preprocessing = {12, 10};
  EXPECT_THROW(Train(m, ds.manifest, testing::AllTrainSplit(ds.manifest), InMemoryLoader(ds), c), Error);
}

TEST(Train, WritesCheckpointsAndCurve) {
  const auto ds = SmallData();
  const auto dir = std::filesystem::temp_directory_path() / "fgresq_trainer_test";
  std::filesystem::remove_all(dir);
  FgresqModel m(testing::TinyConfig());
  TrainConfig c = SmallConfig();
  c.checkpoint_dir = dir.string();
  const auto r = Train(m, ds.manifest, testing::AllTrainSplit(ds.manifest), InMemoryLoader(ds), c);
  EXPECT_EQ(r.checkpoints.size(), 3u);
  for (const auto& p : r.checkpoints) EXPECT_TRUE(std::filesystem::exists(p)) << p;
  EXPECT_TRUE(std::filesystem::exists(dir / "final.json"));
  const std::string csv = LossCurveToCsv(r.curve);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,l_scene,l_rank,l_total,lr");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.curve.size() + 1));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace fgresq
