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

// Test-split evaluation: per-task SRCC/PLCC against mos_norm, pairwise ACC on
// A/B-labelled test pairs, an unweighted average row, optional binned
// analysis, and the with/without-DFL comparison.

#ifndef FGRESQ_EVALUATION_H_
#define FGRESQ_EVALUATION_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgresq/data_model.h"
#include "fgresq/filtration.h"
#include "fgresq/metrics.h"
#include "fgresq/model.h"
#include "fgresq/trainer.h"

namespace fgresq {

class QualityPredictor {
 public:
  virtual ~QualityPredictor() = default;
  virtual std::vector<double> Scores(std::span<const ImageRecord* const> images) = 0;
  // Probability that a is better than b.
  virtual double Preference(const ImageRecord& a, const ImageRecord& b) = 0;
  virtual bool dfl_enabled() const { return true; }
  virtual std::string checkpoint_id() const { return ""; }
};

// Evaluation-mode adapter: resize, center crop, then the model's inference
// path. Features are cached per image id.
class ModelPredictor : public QualityPredictor {
 public:
  ModelPredictor(const FgresqModel& model, ImageLoader loader,
                 Preprocessing preprocessing, std::string checkpoint_id = "",
                 int threads = 0);
  std::vector<double> Scores(std::span<const ImageRecord* const> images) override;
  double Preference(const ImageRecord& a, const ImageRecord& b) override;
  bool dfl_enabled() const override { return model_.config().dfl_enabled; }
  std::string checkpoint_id() const override { return checkpoint_id_; }

 private:
  const QualityFeatures& FeaturesFor(const ImageRecord& record);
  void Prefetch(std::span<const ImageRecord* const> images);

  const FgresqModel& model_;
  ImageLoader loader_;
  Preprocessing pre_;
  std::string checkpoint_id_;
  int threads_;
  std::map<std::string, QualityFeatures> cache_;
};

// Returns mos_norm exactly; p = 1, 0 or 0.5 from the score order.
class OraclePredictor : public QualityPredictor {
 public:
  std::vector<double> Scores(std::span<const ImageRecord* const> images) override;
  double Preference(const ImageRecord& a, const ImageRecord& b) override;
};

class ConstantPredictor : public QualityPredictor {
 public:
  explicit ConstantPredictor(double value = 0.5) : value_(value) {}
  std::vector<double> Scores(std::span<const ImageRecord* const> images) override;
  double Preference(const ImageRecord&, const ImageRecord&) override { return 0.5; }

 private:
  double value_;
};

// Scores and preferences hashed from ids; Preference(b, a) = 1 - Preference(a, b).
class RandomAntisymmetricPredictor : public QualityPredictor {
 public:
  explicit RandomAntisymmetricPredictor(std::uint64_t seed) : seed_(seed) {}
  std::vector<double> Scores(std::span<const ImageRecord* const> images) override;
  double Preference(const ImageRecord& a, const ImageRecord& b) override;

 private:
  std::uint64_t seed_;
};

struct TaskMetrics {
  bool defined = false;  // at least 3 scored images
  std::optional<double> srcc;
  std::optional<double> plcc;
  std::optional<double> acc;
  std::int64_t n_images = 0;
  std::int64_t n_pairs = 0;
};

inline constexpr std::size_t kMinScoredImages = 3;

struct EvaluationReport {
  std::map<Task, TaskMetrics> per_task;  // every task present in the test split
  // Unweighted mean over defined tasks, per metric over tasks where it exists.
  TaskMetrics average;
  std::optional<BinnedReport> binned;
  bool dfl_enabled = true;
  std::string checkpoint_id;
  std::uint64_t split_seed = 0;
  std::string split_fingerprint;
};

struct EvaluationOptions {
  bool binned = false;
  std::vector<double> bin_edges = kDefaultBinEdges;
};

// Throws Error(kEmptyDataset) for an empty test split.
EvaluationReport Evaluate(QualityPredictor& predictor,
                          const DatasetManifest& manifest, const SplitSpec& split,
                          const EvaluationOptions& options = {});

std::string EvaluationReportToJson(const EvaluationReport& report);
EvaluationReport EvaluationReportFromJson(std::string_view json);
// Columns: Task, SRCC, PLCC, ACC, images, pairs; undefined cells print "-".
std::string FormatEvaluationTable(const EvaluationReport& report);

struct MetricDelta {
  std::optional<double> srcc;
  std::optional<double> plcc;
  std::optional<double> acc;
};

struct AblationDelta {
  std::map<Task, MetricDelta> per_task;
  MetricDelta average;
};

// with - without. Throws Error(kIncomparableReports) when the reports come
// from different splits.
AblationDelta AblationCompare(const EvaluationReport& with_dfl,
                              const EvaluationReport& without_dfl);
std::string AblationDeltaToJson(const AblationDelta& delta);
std::string FormatAblationTable(const AblationDelta& delta);

}  // namespace fgresq

#endif  // FGRESQ_EVALUATION_H_
