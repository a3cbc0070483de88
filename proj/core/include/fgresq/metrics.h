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

#ifndef FGRESQ_METRICS_H_
#define FGRESQ_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgresq/data_model.h"
#include "fgresq/image.h"

namespace fgresq {

// 10 * log10(MAX^2 / MSE). Identical inputs return +infinity.
// Throws Error(kDimension) on shape mismatch.
double Psnr(const Image& a, const Image& b, double max_value = 255.0);

// Average (mid-)ranks, 1-based.
std::vector<double> MidRanks(std::span<const double> values);

// Pearson correlation. std::nullopt when either side is constant.
// Throws Error(kInvalidArgument) on mismatched lengths or fewer than 3 values.
std::optional<double> Plcc(std::span<const double> x, std::span<const double> y);

// Spearman correlation as Pearson over mid-ranks.
std::optional<double> Srcc(std::span<const double> x, std::span<const double> y);

// Fraction of pairs with (p_ab > 0.5) == (label == A). p_ab == 0.5 counts as
// wrong. Labels must be A or B. Throws on empty or mismatched input.
double PairwiseAccuracy(std::span<const double> p_ab,
                        std::span<const Preference> labels);

struct Correlation {
  std::optional<double> srcc;
  std::optional<double> plcc;
};

struct BinStats {
  double lo = 0.0;
  double hi = 1.0;
  std::int64_t count = 0;
  Correlation corr;  // undefined for fewer than 3 samples
};

struct BinnedReport {
  std::vector<double> bin_edges;
  std::vector<BinStats> per_bin;
  std::int64_t sample_count = 0;
  Correlation overall;
};

inline const std::vector<double> kDefaultBinEdges = {0.0, 0.2, 0.4,
                                                     0.6, 0.8, 1.0};

// Bin membership is [lo, hi) except the last bin, which is closed. Edges must
// be strictly increasing from 0 to 1, and mos must lie in [0, 1].
BinnedReport BinnedCorrelation(std::span<const double> scores,
                               std::span<const double> mos,
                               std::span<const double> edges = kDefaultBinEdges);

std::string FormatBinnedTable(const BinnedReport& report,
                              const std::string& label);
std::string BinnedReportToJson(const BinnedReport& report);
// Throws Error(kInvalidArgument) on malformed input.
BinnedReport BinnedReportFromJson(std::string_view json);

struct PreferenceObservation {
  double mos_a = 0.0;
  double mos_b = 0.0;
  Preference preference = Preference::kEqual;
};

// A or B preferences that point against the sign of mos_a - mos_b. Equal
// preferences and zero differences never conflict.
bool IsInconsistent(double mos_diff, Preference preference);

struct ConsistencyPoint {
  double mos_diff = 0.0;  // cell centre
  Preference preference = Preference::kEqual;
  std::int64_t frequency = 0;
  bool inconsistent = false;
};

struct DecileRate {
  double abs_diff_lo = 0.0;
  double abs_diff_hi = 0.0;
  std::int64_t count = 0;
  double inconsistency_rate = 0.0;
};

struct ConsistencyReport {
  std::vector<ConsistencyPoint> points;
  // Equal-count groups of observations ordered by |mos_diff|.
  std::vector<DecileRate> deciles;
  double overall_inconsistency_rate = 0.0;
};

// Cells are keyed by (mos_diff rounded to `resolution`, preference). The
// per-cell flag uses the cell centre; decile rates use exact differences.
ConsistencyReport ConsistencyAnalysis(
    std::span<const PreferenceObservation> observations,
    double resolution = 0.05);

// Observations for every fine-grained, labelled pair with scored members.
std::vector<PreferenceObservation> CollectObservations(
    const DatasetManifest& manifest);

std::string FormatConsistencyTable(const ConsistencyReport& report);
std::string ConsistencyReportToJson(const ConsistencyReport& report);

}  // namespace fgresq

#endif  // FGRESQ_METRICS_H_
