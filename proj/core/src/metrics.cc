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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "fgresq/error.h"

namespace fgresq {
namespace {

using nlohmann::json;

void CheckCorrelationInputs(std::span<const double> x,
                            std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "correlation inputs differ in length");
  }
  if (x.size() < 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "correlation needs at least 3 samples");
  }
}

std::optional<double> PearsonUnchecked(std::span<const double> x,
                                       std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Correlation CorrelateOrUndefined(std::span<const double> x,
                                 std::span<const double> y) {
  if (x.size() < 3) return {};
  return {Srcc(x, y), Plcc(x, y)};
}

std::string Fixed(std::optional<double> v, int precision = 3) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, *v);
  return buf;
}

json OptionalJson(std::optional<double> v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

double Psnr(const Image& a, const Image& b, double max_value) {
  if (!a.SameShape(b)) throw Error(ErrorCode::kDimension, "PSNR shape mismatch");
  if (a.empty()) throw Error(ErrorCode::kEmptyImage, "PSNR of empty images");
  double sse = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - db[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(da.size());
  return 10.0 * std::log10(max_value * max_value / mse);
}

std::vector<double> MidRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> Plcc(std::span<const double> x,
                           std::span<const double> y) {
  CheckCorrelationInputs(x, y);
  return PearsonUnchecked(x, y);
}

std::optional<double> Srcc(std::span<const double> x,
                           std::span<const double> y) {
  CheckCorrelationInputs(x, y);
  const auto rx = MidRanks(x);
  const auto ry = MidRanks(y);
  return PearsonUnchecked(rx, ry);
}

double PairwiseAccuracy(std::span<const double> p_ab,
                        std::span<const Preference> labels) {
  if (p_ab.size() != labels.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "accuracy inputs differ in length");
  }
  if (p_ab.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "accuracy over zero pairs");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < p_ab.size(); ++i) {
    if (labels[i] != Preference::kA && labels[i] != Preference::kB) {
      throw Error(ErrorCode::kInvalidArgument,
                  "accuracy labels must be A or B");
    }
    const bool predicted_a = p_ab[i] > 0.5;
    const bool predicted_b = p_ab[i] < 0.5;
    if ((labels[i] == Preference::kA && predicted_a) ||
        (labels[i] == Preference::kB && predicted_b)) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(p_ab.size());
}

BinnedReport BinnedCorrelation(std::span<const double> scores,
                               std::span<const double> mos,
                               std::span<const double> edges) {
  if (scores.size() != mos.size()) {
    throw Error(ErrorCode::kInvalidArgument, "scores and mos differ in length");
  }
  if (edges.size() < 2 || edges.front() != 0.0 || edges.back() != 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "bin edges must run from 0 to 1");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bin edges must be strictly increasing");
    }
  }
  const std::size_t bins = edges.size() - 1;
  std::vector<std::vector<double>> bin_scores(bins), bin_mos(bins);
  for (std::size_t i = 0; i < mos.size(); ++i) {
    if (!(mos[i] >= 0.0 && mos[i] <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "mos value outside [0,1]");
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), mos[i]);
    std::size_t b = static_cast<std::size_t>(it - edges.begin()) - 1;
    if (b >= bins) b = bins - 1;  // mos == 1 falls in the closed last bin
    bin_scores[b].push_back(scores[i]);
    bin_mos[b].push_back(mos[i]);
  }
  BinnedReport report;
  report.bin_edges.assign(edges.begin(), edges.end());
  report.sample_count = static_cast<std::int64_t>(mos.size());
  for (std::size_t b = 0; b < bins; ++b) {
    BinStats stats;
    stats.lo = edges[b];
    stats.hi = edges[b + 1];
    stats.count = static_cast<std::int64_t>(bin_mos[b].size());
    stats.corr = CorrelateOrUndefined(bin_scores[b], bin_mos[b]);
    report.per_bin.push_back(stats);
  }
  report.overall = CorrelateOrUndefined(scores, mos);
  return report;
}

std::string FormatBinnedTable(const BinnedReport& report,
                              const std::string& label) {
  std::ostringstream out;
  out << "Method";
  for (const auto& b : report.per_bin) {
    const bool last = &b == &report.per_bin.back();
    out << '\t' << '[' << Fixed(b.lo, 1) << ',' << Fixed(b.hi, 1)
        << (last ? ']' : ')');
  }
  out << "\tOverall\n";
  out << label << " SRCC";
  for (const auto& b : report.per_bin) out << '\t' << Fixed(b.corr.srcc);
  out << '\t' << Fixed(report.overall.srcc) << '\n';
  out << label << " PLCC";
  for (const auto& b : report.per_bin) out << '\t' << Fixed(b.corr.plcc);
  out << '\t' << Fixed(report.overall.plcc) << '\n';
  out << "count";
  for (const auto& b : report.per_bin) out << '\t' << b.count;
  out << '\t' << report.sample_count << '\n';
  return out.str();
}

std::string BinnedReportToJson(const BinnedReport& report) {
  json bins = json::array();
  for (const auto& b : report.per_bin) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"count", b.count},
                    {"srcc", OptionalJson(b.corr.srcc)},
                    {"plcc", OptionalJson(b.corr.plcc)}});
  }
  json obj = {{"bin_edges", report.bin_edges},
              {"sample_count", report.sample_count},
              {"per_bin", bins},
              {"overall",
               {{"srcc", OptionalJson(report.overall.srcc)},
                {"plcc", OptionalJson(report.overall.plcc)}}}};
  return obj.dump(2) + "\n";
}

BinnedReport BinnedReportFromJson(std::string_view text) {
  auto optional = [](const json& j, const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  BinnedReport r;
  try {
    const json j = json::parse(text);
    r.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    r.sample_count = j.at("sample_count").get<std::int64_t>();
    for (const auto& b : j.at("per_bin")) {
      r.per_bin.push_back({b.at("lo").get<double>(), b.at("hi").get<double>(),
                           b.at("count").get<std::int64_t>(),
                           {optional(b, "srcc"), optional(b, "plcc")}});
    }
    r.overall = {optional(j.at("overall"), "srcc"), optional(j.at("overall"), "plcc")};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed binned report: ") + e.what());
  }
  return r;
}

bool IsInconsistent(double mos_diff, Preference preference) {
  if (preference == Preference::kA) return mos_diff < 0.0;
  if (preference == Preference::kB) return mos_diff > 0.0;
  return false;
}

ConsistencyReport ConsistencyAnalysis(
    std::span<const PreferenceObservation> observations, double resolution) {
  if (!(resolution > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "resolution must be positive");
  }
  ConsistencyReport report;
  std::map<std::pair<long long, int>, std::int64_t> cells;
  std::vector<std::pair<double, bool>> by_magnitude;
  by_magnitude.reserve(observations.size());
  std::int64_t inconsistent_total = 0;
  for (const auto& obs : observations) {
    if (obs.preference == Preference::kUnlabeled) continue;
    const double diff = obs.mos_a - obs.mos_b;
    const long long cell = std::llround(diff / resolution);
    ++cells[{cell, static_cast<int>(obs.preference)}];
    const bool bad = IsInconsistent(diff, obs.preference);
    inconsistent_total += bad ? 1 : 0;
    by_magnitude.emplace_back(std::abs(diff), bad);
  }
  for (const auto& [key, frequency] : cells) {
    ConsistencyPoint point;
    point.mos_diff = static_cast<double>(key.first) * resolution;
    point.preference = static_cast<Preference>(key.second);
    point.frequency = frequency;
    point.inconsistent = IsInconsistent(point.mos_diff, point.preference);
    report.points.push_back(point);
  }
  const std::size_t n = by_magnitude.size();
  if (n > 0) {
    report.overall_inconsistency_rate =
        static_cast<double>(inconsistent_total) / static_cast<double>(n);
    std::stable_sort(by_magnitude.begin(), by_magnitude.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const std::size_t groups = std::min<std::size_t>(10, n);
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t lo = g * n / groups;
      const std::size_t hi = (g + 1) * n / groups;
      DecileRate rate;
      rate.abs_diff_lo = by_magnitude[lo].first;
      rate.abs_diff_hi = by_magnitude[hi - 1].first;
      rate.count = static_cast<std::int64_t>(hi - lo);
      std::int64_t bad = 0;
      for (std::size_t i = lo; i < hi; ++i) bad += by_magnitude[i].second ? 1 : 0;
      rate.inconsistency_rate =
          static_cast<double>(bad) / static_cast<double>(rate.count);
      report.deciles.push_back(rate);
    }
  }
  return report;
}

std::vector<PreferenceObservation> CollectObservations(
    const DatasetManifest& manifest) {
  std::vector<PreferenceObservation> out;
  for (const auto& p : manifest.pairs) {
    if (p.status != PairStatus::kFineGrained ||
        p.preference == Preference::kUnlabeled) {
      continue;
    }
    const auto& a = manifest.Image(p.image_a);
    const auto& b = manifest.Image(p.image_b);
    if (!a.mos_norm || !b.mos_norm) continue;
    out.push_back({*a.mos_norm, *b.mos_norm, p.preference});
  }
  return out;
}

std::string FormatConsistencyTable(const ConsistencyReport& report) {
  std::ostringstream out;
  out << "decile\t|mos_diff| range\tcount\tinconsistency\n";
  for (std::size_t i = 0; i < report.deciles.size(); ++i) {
    const auto& d = report.deciles[i];
    out << i + 1 << "\t[" << Fixed(d.abs_diff_lo) << ", " << Fixed(d.abs_diff_hi)
        << "]\t" << d.count << '\t' << Fixed(d.inconsistency_rate) << '\n';
  }
  out << "overall\t\t\t" << Fixed(report.overall_inconsistency_rate) << '\n';
  return out.str();
}

std::string ConsistencyReportToJson(const ConsistencyReport& report) {
  json points = json::array();
  for (const auto& p : report.points) {
    points.push_back({{"mos_diff", p.mos_diff},
                      {"preference", ToString(p.preference)},
                      {"frequency", p.frequency},
                      {"inconsistent", p.inconsistent}});
  }
  json deciles = json::array();
  for (const auto& d : report.deciles) {
    deciles.push_back({{"abs_diff_lo", d.abs_diff_lo},
                       {"abs_diff_hi", d.abs_diff_hi},
                       {"count", d.count},
                       {"inconsistency_rate", d.inconsistency_rate}});
  }
  json obj = {{"points", points},
              {"deciles", deciles},
              {"overall_inconsistency_rate", report.overall_inconsistency_rate}};
  return obj.dump(2) + "\n";
}

}  // namespace fgresq
