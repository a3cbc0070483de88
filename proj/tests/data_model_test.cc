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

#include "fgresq/data_model.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "fgresq/error.h"

namespace fgresq {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

DatasetManifest ThreeImages() {
  DatasetManifest m;
  m.scenes.push_back({"s", 0.1, 3});
  m.images.push_back({"a", "s", "c", Task::kDenoising, 1.0, 0.0, "a.ppm"});
  m.images.push_back({"b", "s", "c", Task::kDenoising, 2.0, 0.5, "b.ppm"});
  m.images.push_back({"c", "s", "c", Task::kDenoising, 3.0, 1.0, "c.ppm"});
  m.pairs.push_back({"a~b", "a", "b", PairStatus::kFineGrained, Preference::kB, 0.8});
  m.Rebuild();
  return m;
}

TEST(Manifest, EmptyInputHasNoRecords) {
  std::istringstream in("");
  const DatasetManifest m = ReadManifest(in);
  EXPECT_TRUE(m.images.empty());
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_TRUE(m.scenes.empty());
}

TEST(Manifest, RoundTripKeepsCounts) {
  const DatasetManifest m = ThreeImages();
  const auto path = std::filesystem::temp_directory_path() / "fgresq_roundtrip.jsonl";
  SaveManifest(m, path.string());
  const DatasetManifest back = LoadManifest(path.string());
  EXPECT_EQ(back.images.size(), 3u);
  EXPECT_EQ(back.pairs.size(), 1u);
  EXPECT_EQ(back.scenes.size(), 1u);
  EXPECT_EQ(back.images, m.images);
  EXPECT_EQ(back.pairs, m.pairs);
  EXPECT_EQ(back.scenes, m.scenes);
  std::filesystem::remove(path);
}

TEST(Manifest, DanglingPairIsIntegrityError) {
  std::istringstream in(
      R"({"record":"scene","scene_id":"s"})"
      "\n"
      R"({"record":"image","image_id":"a","scene_id":"s","content_id":"c","task":"denoising","path":"a"})"
      "\n"
      R"({"record":"pair","pair_id":"a~z","image_a":"a","image_b":"z"})"
      "\n");
  EXPECT_EQ(CodeOf([&] { ReadManifest(in); }), ErrorCode::kIntegrity);
}

TEST(Manifest, MalformedLineNamesTheLine) {
  std::istringstream in("{\"record\":\"scene\",\"scene_id\":\"s\"}\n{not json\n");
  try {
    ReadManifest(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedManifest);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
}

TEST(Manifest, SceneDefaultsTau) {
  std::istringstream in("{\"record\":\"scene\",\"scene_id\":\"s\"}\n");
  EXPECT_DOUBLE_EQ(ReadManifest(in).scenes[0].tau_d, 0.1);
}

TEST(NormalizeMos, Examples) {
  EXPECT_EQ(NormalizeMos(std::vector<double>{0, 5, 10}), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(NormalizeMos(std::vector<double>{7, 7, 7}), (std::vector<double>{0.5, 0.5, 0.5}));
  const auto r = NormalizeMos(std::vector<double>{2, 4, 8});
  EXPECT_DOUBLE_EQ(r[0], 0.0);
  EXPECT_NEAR(r[1], 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(r[2], 1.0);
  EXPECT_EQ(CodeOf([] { NormalizeMos(std::vector<double>{}); }), ErrorCode::kEmptyScene);
}

TEST(NormalizeMos, PerScene) {
  DatasetManifest m = ThreeImages();
  m.images[0].mos_norm.reset();
  m.images[0].mos_raw = 10.0;
  const DatasetManifest n = NormalizeManifestMos(m);
  EXPECT_DOUBLE_EQ(*n.Image("a").mos_norm, 1.0);
  EXPECT_DOUBLE_EQ(*n.Image("b").mos_norm, 0.0);
}

DatasetManifest PairsOverTasks(int first, int second) {
  DatasetManifest m;
  m.scenes.push_back({"s", 0.1, 0});
  auto add = [&](Task task, int n, const std::string& prefix) {
    for (int i = 0; i < n; ++i) {
      const std::string c = prefix + std::to_string(i);
      m.images.push_back({c + "a", "s", c, task, 1.0, 0.2, ""});
      m.images.push_back({c + "b", "s", c, task, 2.0, 0.3, ""});
      m.pairs.push_back({CanonicalPairId(c + "a", c + "b"), c + "a", c + "b",
                         PairStatus::kFineGrained, Preference::kB, std::nullopt});
    }
  };
  add(Task::kDenoising, first, "n");
  add(Task::kDeblurring, second, "b");
  m.scenes[0].sample_count = static_cast<std::int64_t>(m.images.size());
  m.Rebuild();
  return m;
}

TEST(Split, TenPairs) {
  const SplitSpec s = SplitByPairs(PairsOverTasks(10, 0), 0.8, 1);
  EXPECT_EQ(s.train_pair_ids.size(), 8u);
  EXPECT_EQ(s.test_pair_ids.size(), 2u);
}

TEST(Split, SameSeedSameSplit) {
  const DatasetManifest m = PairsOverTasks(13, 7);
  EXPECT_EQ(SplitByPairs(m, 0.7, 5), SplitByPairs(m, 0.7, 5));
  EXPECT_EQ(SplitToJson(SplitByPairs(m, 0.7, 5)), SplitToJson(SplitByPairs(m, 0.7, 5)));
  EXPECT_NE(SplitByPairs(m, 0.7, 5).train_pair_ids, SplitByPairs(m, 0.7, 6).train_pair_ids);
}

TEST(Split, StratifiedByTask) {
  const DatasetManifest m = PairsOverTasks(60, 40);
  const SplitSpec s = SplitByPairs(m, 0.8, 3);
  std::map<Task, int> train, test;
  for (const auto& id : s.train_pair_ids) ++train[m.PairTask(m.Pair(id))];
  for (const auto& id : s.test_pair_ids) ++test[m.PairTask(m.Pair(id))];
  EXPECT_EQ(train[Task::kDenoising], 48);
  EXPECT_EQ(test[Task::kDenoising], 12);
  EXPECT_EQ(train[Task::kDeblurring], 32);
  EXPECT_EQ(test[Task::kDeblurring], 8);
  EXPECT_EQ(SplitImageLeakage(m, s), 0u);
}

TEST(Split, NeedsFineGrainedPairs) {
  DatasetManifest m = PairsOverTasks(3, 0);
  for (auto& p : m.pairs) {
    p.status = PairStatus::kCoarseRejected;
    p.preference = Preference::kUnlabeled;
  }
  m.Rebuild();
  EXPECT_EQ(CodeOf([&] { SplitByPairs(m, 0.8, 0); }), ErrorCode::kEmptyDataset);
}

TEST(Split, JsonRoundTripAndFingerprint) {
  const SplitSpec s = SplitByPairs(PairsOverTasks(9, 4), 0.75, 2);
  const SplitSpec back = SplitFromJson(SplitToJson(s));
  EXPECT_EQ(back, s);
  EXPECT_EQ(SplitFingerprint(back), SplitFingerprint(s));
  SplitSpec other = s;
  other.test_pair_ids.pop_back();
  EXPECT_NE(SplitFingerprint(other), SplitFingerprint(s));
}

TEST(PairId, Canonical) {
  EXPECT_EQ(CanonicalPairId("b", "a"), CanonicalPairId("a", "b"));
  EXPECT_EQ(CanonicalPairId("a", "b"), "a~b");
}

TEST(Enums, ParseRoundTrip) {
  for (Task t : kAllTasks) EXPECT_EQ(ParseTask(ToString(t)), t);
  for (Preference p : {Preference::kA, Preference::kB, Preference::kEqual, Preference::kUnlabeled}) {
    EXPECT_EQ(ParsePreference(ToString(p)), p);
  }
  EXPECT_EQ(CodeOf([] { ParseTask("sharpening"); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace fgresq
