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

#include "fgresq/evaluation.h"

#include <gtest/gtest.h>

#include <cmath>

#include "fgresq/error.h"
#include "fgresq/synthetic.h"
#include "fixtures.h"

namespace fgresq {
namespace {

struct Fixture {
  SyntheticDataset ds;
  SplitSpec split;
};

Fixture Make(std::uint64_t seed = 5) {
  SyntheticDatasetOptions o;
  o.tasks = {Task::kDeblurring, Task::kDenoising, Task::kDehazing};
  o.contents_per_task = 6;
  o.images_per_content = 4;
  o.image_size = 8;
  o.seed = seed;
  Fixture f{BuildSyntheticDataset(o), {}};
  f.split = SplitByPairs(f.ds.manifest, 0.5, seed);
  return f;
}

TEST(Evaluate, OracleIsPerfect) {
  const Fixture f = Make();
  OraclePredictor oracle;
  const EvaluationReport r = Evaluate(oracle, f.ds.manifest, f.split);
  ASSERT_EQ(r.per_task.size(), 3u);
  for (const auto& [task, m] : r.per_task) {
    EXPECT_TRUE(m.defined);
    EXPECT_NEAR(*m.srcc, 1.0, 1e-12);
    EXPECT_NEAR(*m.plcc, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(*m.acc, 1.0);
    EXPECT_GT(m.n_pairs, 0);
  }
  EXPECT_NEAR(*r.average.srcc, 1.0, 1e-12);
  EXPECT_EQ(r.split_fingerprint, SplitFingerprint(f.split));
}

TEST(Evaluate, ConstantHasUndefinedCorrelationAndZeroAccuracy) {
  const Fixture f = Make();
  ConstantPredictor constant;
  const EvaluationReport r = Evaluate(constant, f.ds.manifest, f.split);
  for (const auto& [task, m] : r.per_task) {
    EXPECT_FALSE(m.srcc.has_value());
    EXPECT_FALSE(m.plcc.has_value());
    EXPECT_DOUBLE_EQ(*m.acc, 0.0);
  }
  EXPECT_FALSE(r.average.srcc.has_value());
}

TEST(Evaluate, RandomAccuracyNearChance) {
  const Fixture f = Make();
  RandomAntisymmetricPredictor random(17);
  const EvaluationReport r = Evaluate(random, f.ds.manifest, f.split);
  std::int64_t n = 0;
  double correct = 0;
  for (const auto& [task, m] : r.per_task) {
    n += m.n_pairs;
    correct += *m.acc * static_cast<double>(m.n_pairs);
  }
  const double rate = correct / static_cast<double>(n);
  EXPECT_LE(std::abs(rate - 0.5), 4.0 * std::sqrt(0.25 / static_cast<double>(n)));
  EXPECT_DOUBLE_EQ(random.Preference(f.ds.manifest.images[0], f.ds.manifest.images[1]) +
                       random.Preference(f.ds.manifest.images[1], f.ds.manifest.images[0]),
                   1.0);
}

TEST(Evaluate, AverageIsUnweightedMean) {
  const Fixture f = Make();
  RandomAntisymmetricPredictor random(3);
  const EvaluationReport r = Evaluate(random, f.ds.manifest, f.split);
  double srcc = 0, acc = 0;
  for (const auto& [task, m] : r.per_task) {
    srcc += *m.srcc;
    acc += *m.acc;
  }
  EXPECT_NEAR(*r.average.srcc, srcc / 3, 1e-12);
  EXPECT_NEAR(*r.average.acc, acc / 3, 1e-12);
}

TEST(Evaluate, JsonAndTable) {
  const Fixture f = Make();
  OraclePredictor oracle;
  EvaluationOptions options;
  options.binned = true;
  const EvaluationReport r = Evaluate(oracle, f.ds.manifest, f.split, options);
  ASSERT_TRUE(r.binned.has_value());
  const EvaluationReport back = EvaluationReportFromJson(EvaluationReportToJson(r));
  EXPECT_EQ(EvaluationReportToJson(back), EvaluationReportToJson(r));
  const std::string table = FormatEvaluationTable(r);
  EXPECT_NE(table.find("SRCC"), std::string::npos);
  EXPECT_NE(table.find("Average"), std::string::npos);
  EXPECT_LT(table.find("Deblurring"), table.find("Denoising"));
}

TEST(Evaluate, EmptyTestSplit) {
  Fixture f = Make();
  f.split.test_pair_ids.clear();
  OraclePredictor oracle;
  EXPECT_THROW(Evaluate(oracle, f.ds.manifest, f.split), Error);
}

TEST(Ablation, DeltasAndComparability) {
  const Fixture f = Make();
  OraclePredictor oracle;
  RandomAntisymmetricPredictor random(8);
  const EvaluationReport with = Evaluate(random, f.ds.manifest, f.split);
  const AblationDelta same = AblationCompare(with, with);
  for (const auto& [task, d] : same.per_task) EXPECT_DOUBLE_EQ(*d.srcc, 0.0);

  EvaluationReport better = with;
  for (auto& [task, m] : better.per_task) *m.srcc += 0.1;
  *better.average.srcc += 0.1;
  const AblationDelta d = AblationCompare(better, with);
  for (const auto& [task, delta] : d.per_task) EXPECT_NEAR(*delta.srcc, 0.1, 1e-12);
  EXPECT_NEAR(*d.average.srcc, 0.1, 1e-12);
  EXPECT_NE(FormatAblationTable(d).find("Average"), std::string::npos);

  EvaluationReport other = with;
  other.split_fingerprint = "different";
  try {
    AblationCompare(with, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncomparableReports);
  }
  other = with;
  other.split_seed += 1;
  EXPECT_THROW(AblationCompare(with, other), Error);
}

TEST(ModelPredictor, MatchesDirectInference) {
  const Fixture f = Make();
  const FgresqModel model(testing::TinyConfig());
  ModelPredictor p(model, InMemoryLoader(f.ds), {8, 8}, "ckpt", 2);
  std::vector<const ImageRecord*> recs = {&f.ds.manifest.images[0], &f.ds.manifest.images[1]};
  const auto scores = p.Scores(recs);
  const std::vector<Image> imgs = {f.ds.images.at(recs[0]->image_id),
                                   f.ds.images.at(recs[1]->image_id)};
  const auto feats = model.Features(imgs);
  EXPECT_NEAR(scores[0], model.PredictScore(feats[0]), 1e-12);
  EXPECT_NEAR(scores[1], model.PredictScore(feats[1]), 1e-12);
  EXPECT_NEAR(p.Preference(*recs[0], *recs[1]), model.PredictPreference(feats[0], feats[1]), 1e-12);
  EXPECT_EQ(p.checkpoint_id(), "ckpt");
}

}  // namespace
}  // namespace fgresq
