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

#include "fgresq/metrics.h"

#include <gtest/gtest.h>

#include <cmath>

#include "fgresq/error.h"
#include "fgresq/random.h"
#include "fgresq/synthetic.h"
#include "fixtures.h"

namespace fgresq {
namespace {

using V = std::vector<double>;

TEST(Correlation, MonotoneAndAffine) {
  const V x = {1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(*Srcc(x, V{2, 4, 8, 16, 32}), 1.0);
  EXPECT_DOUBLE_EQ(*Srcc(x, V{5, 4, 3, 2, 1}), -1.0);
  EXPECT_NEAR(*Plcc(x, V{5, 7, 9, 11, 13}), 1.0, 1e-15);
  EXPECT_NEAR(*Plcc(x, V{-1, -2, -3, -4, -5}), -1.0, 1e-15);
}

TEST(Correlation, TiedExampleMatchesOracle) {
  const V x = {1, 2, 2, 3};
  const V y = {1, 3, 2, 4};
  EXPECT_NEAR(*Srcc(x, y), *testing::BruteSrcc(x, y), 1e-12);
  EXPECT_EQ(MidRanks(x), (V{1, 2.5, 2.5, 4}));
}

TEST(Correlation, RandomVectorsMatchOracle) {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    V x(10), y(10);
    for (int i = 0; i < 10; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
    }
    EXPECT_NEAR(*Plcc(x, y), *testing::BrutePlcc(x, y), 1e-12);
    EXPECT_NEAR(*Srcc(x, y), *testing::BruteSrcc(x, y), 1e-12);
  }
}

TEST(Correlation, ConstantIsUndefined) {
  EXPECT_FALSE(Srcc(V{1, 1, 1}, V{1, 2, 3}).has_value());
  EXPECT_FALSE(Plcc(V{1, 2, 3}, V{4, 4, 4}).has_value());
  EXPECT_THROW(Srcc(V{1, 2}, V{1, 2}), Error);
  EXPECT_THROW(Plcc(V{1, 2, 3}, V{1, 2}), Error);
}

TEST(PairwiseAccuracy, Examples) {
  using P = Preference;
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{0.9, 0.2}, std::vector<P>{P::kA, P::kB}), 1.0);
  EXPECT_DOUBLE_EQ(PairwiseAccuracy(V{0.5, 0.5}, std::vector<P>{P::kA, P::kB}), 0.0);
  EXPECT_DOUBLE_EQ(
      PairwiseAccuracy(V{0.9, 0.8, 0.1, 0.7}, std::vector<P>{P::kA, P::kA, P::kB, P::kB}), 0.75);
  EXPECT_THROW(PairwiseAccuracy(V{}, std::vector<P>{}), Error);
  EXPECT_THROW(PairwiseAccuracy(V{0.4}, std::vector<P>{P::kEqual}), Error);
}

TEST(Binned, ExactScoresGiveOne) {
  const auto s = NoisyPredictor(2000, 0.0, 1);
  const BinnedReport r = BinnedCorrelation(s.score, s.mos);
  EXPECT_DOUBLE_EQ(*r.overall.srcc, 1.0);
  for (const auto& b : r.per_bin) {
    if (b.corr.srcc) EXPECT_NEAR(*b.corr.srcc, 1.0, 1e-12);
  }
}

TEST(Binned, NoisyScoresCollapseInNarrowRanges) {
  const auto s = NoisyPredictor(10000, 0.1, 2024);
  const BinnedReport r = BinnedCorrelation(s.score, s.mos);
  EXPECT_GE(*r.overall.srcc, 0.9);
  ASSERT_EQ(r.per_bin.size(), 5u);
  for (const auto& b : r.per_bin) EXPECT_LE(*b.corr.srcc, 0.75);
}

TEST(Binned, EdgesAndSparseBins) {
  const V mos = {0.0, 0.1, 0.2, 1.0};
  const BinnedReport r = BinnedCorrelation(mos, mos, V{0.0, 0.5, 1.0});
  EXPECT_EQ(r.per_bin[0].count, 3);
  EXPECT_EQ(r.per_bin[1].count, 1);
  EXPECT_FALSE(r.per_bin[1].corr.srcc.has_value());
  EXPECT_THROW(BinnedCorrelation(mos, mos, V{0.0, 0.6, 0.5, 1.0}), Error);
}

TEST(Consistency, Rules) {
  EXPECT_FALSE(IsInconsistent(0.2, Preference::kA));
  EXPECT_TRUE(IsInconsistent(0.2, Preference::kB));
  EXPECT_TRUE(IsInconsistent(-0.2, Preference::kA));
  EXPECT_FALSE(IsInconsistent(0.2, Preference::kEqual));
  EXPECT_FALSE(IsInconsistent(0.0, Preference::kB));
}

TEST(Consistency, RateFallsAcrossDeciles) {
  PreferencePopulationOptions o;
  o.seed = 77;
  const ConsistencyReport r = ConsistencyAnalysis(PreferencePopulation(o));
  ASSERT_EQ(r.deciles.size(), 10u);
  for (std::size_t i = 1; i < r.deciles.size(); ++i) {
    EXPECT_LE(r.deciles[i].inconsistency_rate, r.deciles[i - 1].inconsistency_rate) << i;
  }
  EXPECT_GE(r.deciles.front().inconsistency_rate - r.deciles.back().inconsistency_rate, 0.15);
}

TEST(Consistency, CellsAggregate) {
  std::vector<PreferenceObservation> obs = {
      {0.6, 0.5, Preference::kA}, {0.61, 0.5, Preference::kA}, {0.6, 0.5, Preference::kB}};
  const ConsistencyReport r = ConsistencyAnalysis(obs, 0.05);
  std::int64_t total = 0;
  for (const auto& p : r.points) total += p.frequency;
  EXPECT_EQ(total, 3);
  EXPECT_NEAR(r.overall_inconsistency_rate, 1.0 / 3.0, 1e-12);
}

}  // namespace
}  // namespace fgresq
