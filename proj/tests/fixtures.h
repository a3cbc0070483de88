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

// Shared datasets and reference implementations for the test suites.

#ifndef FGRESQ_TESTS_FIXTURES_H_
#define FGRESQ_TESTS_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgresq/data_model.h"
#include "fgresq/losses.h"
#include "fgresq/model.h"
#include "fgresq/random.h"
#include "fgresq/synthetic.h"
#include "fgresq/trainer.h"

namespace fgresq::testing {

// 20 content groups of 5 images over three tasks (7, 7 and 6 groups), so
// exactly 200 within-group pairs, all fine-grained and score-labelled.
inline SyntheticDataset OverfitDataset(int size = 64, std::uint64_t seed = 11) {
  SyntheticDatasetOptions o;
  o.tasks = {Task::kDeblurring, Task::kDenoising, Task::kDehazing};
  o.contents_per_task = 7;
  o.images_per_content = 5;
  o.image_size = size;
  o.seed = seed;
  SyntheticDataset ds = BuildSyntheticDataset(o);
  const std::string drop = "dehazing-c06";
  auto& m = ds.manifest;
  std::erase_if(m.pairs, [&](const PairRecord& p) {
    return m.Image(p.image_a).content_id == drop;
  });
  std::erase_if(m.images, [&](const ImageRecord& r) {
    if (r.content_id != drop) return false;
    ds.images.erase(r.image_id);
    return true;
  });
  for (auto& s : m.scenes) {
    s.sample_count = std::count_if(m.images.begin(), m.images.end(),
                                   [&](const ImageRecord& r) { return r.scene_id == s.scene_id; });
  }
  m.Rebuild();
  return ds;
}

inline SplitSpec AllTrainSplit(const DatasetManifest& m) {
  SplitSpec s;
  for (const auto& p : m.pairs) s.train_pair_ids.push_back(p.pair_id);
  std::sort(s.train_pair_ids.begin(), s.train_pair_ids.end());
  return s;
}

// Mid-ranks by counting: rank = #smaller + (#equal + 1) / 2, 1-based.
inline std::vector<long double> BruteMidRanks(std::span<const double> x) {
  std::vector<long double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    long double less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) ++less;
      if (x[j] == x[i]) ++equal;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

// Pearson from centred sums in long double; nullopt when either side is
// constant.
inline std::optional<double> BrutePearson(std::span<const long double> x,
                                          std::span<const long double> y) {
  const std::size_t n = x.size();
  long double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

inline std::optional<double> BrutePlcc(std::span<const double> x, std::span<const double> y) {
  std::vector<long double> lx(x.begin(), x.end()), ly(y.begin(), y.end());
  return BrutePearson(lx, ly);
}

inline std::optional<double> BruteSrcc(std::span<const double> x, std::span<const double> y) {
  return BrutePearson(BruteMidRanks(x), BruteMidRanks(y));
}

// Small model for gradient checks: d = 16, 8x8 inputs in 4x4 patches.
inline ModelConfig TinyConfig(std::uint64_t seed = 3) {
  ModelConfig c;
  c.feature_dim = 16;
  c.prompt_count = 4;
  c.encoder_width = 16;
  c.mixer_hidden = 12;
  c.head_hidden = 12;
  c.image_size = 8;
  c.patch_size = 4;
  c.channels = 3;
  c.seed = seed;
  return c;
}

// Three scenes of six images with random patches and scores, plus eight
// labelled pairs (targets 1, 0 and 0.5) spread over the scenes.
inline ObjectiveBatch GradientCheckBatch(const ModelConfig& c, std::uint64_t seed) {
  Rng rng(seed);
  ObjectiveBatch b;
  const int n = 18;
  b.patches.resize(static_cast<Eigen::Index>(n) * c.patches_per_image(), c.patch_dim());
  for (Eigen::Index i = 0; i < b.patches.size(); ++i) b.patches.data()[i] = rng.normal();
  const std::vector<double> w = InverseCountWeights(std::vector<std::int64_t>{6, 6, 6});
  for (int s = 0; s < 3; ++s) {
    ObjectiveBatch::Scene scene;
    for (int k = 0; k < 6; ++k) {
      scene.rows.push_back(6 * s + k);
      scene.mos.push_back(rng.uniform01());
    }
    scene.weight = w[s];
    b.scenes.push_back(std::move(scene));
  }
  const int pairs[8][2] = {{0, 1}, {2, 5}, {6, 7}, {8, 11}, {9, 10}, {12, 13}, {14, 17}, {3, 4}};
  const double targets[8] = {1.0, 0.0, 1.0, 0.5, 0.0, 1.0, 0.0, 0.5};
  for (int k = 0; k < 8; ++k) {
    b.pair_a.push_back(pairs[k][0]);
    b.pair_b.push_back(pairs[k][1]);
    b.pair_target.push_back(targets[k]);
  }
  return b;
}

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t entries = 0;
  std::string worst;
};

// Relative error |a - n| / max(|a|, |n|, 1e-6) between the tape gradient and
// a central difference, over every entry of every trainable parameter.
inline GradientCheckResult CheckGradients(FgresqModel& model, const ObjectiveBatch& batch,
                                          const TrainConfig& config, double h = 1e-5) {
  model.parameters().ZeroGrad();
  {
    ad::Tape t;
    const ObjectiveValue obj = ComputeObjective(t, model, batch, config);
    t.Backward(obj.total);
  }
  auto value_at = [&] {
    ad::Tape t(false);
    return ComputeObjective(t, model, batch, config).total.scalar();
  };
  GradientCheckResult r;
  for (auto& p : model.parameters().all()) {
    if (!p.trainable) continue;
    ad::Node& node = p.var.node();
    const ad::Matrix grad = node.grad.size() ? node.grad
                                             : ad::Matrix::Zero(node.value.rows(), node.value.cols());
    for (Eigen::Index i = 0; i < node.value.size(); ++i) {
      const double orig = node.value.data()[i];
      node.value.data()[i] = orig + h;
      const double up = value_at();
      node.value.data()[i] = orig - h;
      const double down = value_at();
      node.value.data()[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grad.data()[i];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      ++r.entries;
      if (rel > r.max_relative_error) {
        r.max_relative_error = rel;
        r.worst = p.name + "[" + std::to_string(i) + "]";
      }
    }
  }
  model.parameters().ZeroGrad();
  return r;
}

}  // namespace fgresq::testing

#endif  // FGRESQ_TESTS_FIXTURES_H_
