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

#include <algorithm>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "fgresq/error.h"
#include "fgresq/parallel.h"
#include "fgresq/random.h"

namespace fgresq {

using nlohmann::json;

ModelPredictor::ModelPredictor(const FgresqModel& model, ImageLoader loader,
                               Preprocessing preprocessing,
                               std::string checkpoint_id, int threads)
    : model_(model),
      loader_(std::move(loader)),
      pre_(preprocessing),
      checkpoint_id_(std::move(checkpoint_id)),
      threads_(threads) {}

void ModelPredictor::Prefetch(std::span<const ImageRecord* const> images) {
  std::vector<const ImageRecord*> missing;
  std::set<std::string> seen;
  for (const ImageRecord* r : images) {
    if (!cache_.count(r->image_id) && seen.insert(r->image_id).second) {
      missing.push_back(r);
    }
  }
  constexpr std::size_t kChunk = 16;
  const std::size_t chunks = (missing.size() + kChunk - 1) / kChunk;
  std::vector<std::vector<QualityFeatures>> results(chunks);
  ParallelFor(chunks, threads_, [&](std::size_t c) {
    std::vector<Image> batch;
    for (std::size_t i = c * kChunk; i < std::min(missing.size(), (c + 1) * kChunk); ++i) {
      batch.push_back(CenterCrop(ResizeForModel(model_, loader_(*missing[i]), pre_),
                                 pre_.crop));
    }
    results[c] = model_.Features(batch);
  });
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t k = 0; k < results[c].size(); ++k) {
      cache_[missing[c * kChunk + k]->image_id] = std::move(results[c][k]);
    }
  }
}

const QualityFeatures& ModelPredictor::FeaturesFor(const ImageRecord& record) {
  auto it = cache_.find(record.image_id);
  if (it != cache_.end()) return it->second;
  const ImageRecord* one[] = {&record};
  Prefetch(one);
  return cache_.at(record.image_id);
}

std::vector<double> ModelPredictor::Scores(std::span<const ImageRecord* const> images) {
  Prefetch(images);
  std::vector<double> out;
  out.reserve(images.size());
  for (const ImageRecord* r : images) out.push_back(model_.PredictScore(cache_.at(r->image_id)));
  return out;
}

double ModelPredictor::Preference(const ImageRecord& a, const ImageRecord& b) {
  const QualityFeatures& fa = FeaturesFor(a);
  const QualityFeatures& fb = FeaturesFor(b);
  return model_.PredictPreference(fa, fb);
}

std::vector<double> OraclePredictor::Scores(std::span<const ImageRecord* const> images) {
  std::vector<double> out;
  for (const ImageRecord* r : images) out.push_back(r->mos_norm.value_or(0.0));
  return out;
}

double OraclePredictor::Preference(const ImageRecord& a, const ImageRecord& b) {
  const double sa = a.mos_norm.value_or(0.0);
  const double sb = b.mos_norm.value_or(0.0);
  return sa > sb ? 1.0 : (sa < sb ? 0.0 : 0.5);
}

std::vector<double> ConstantPredictor::Scores(std::span<const ImageRecord* const> images) {
  return std::vector<double>(images.size(), value_);
}

namespace {

std::uint64_t HashId(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return DeriveSeed(h, 0);
}

double Unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<double> RandomAntisymmetricPredictor::Scores(
    std::span<const ImageRecord* const> images) {
  std::vector<double> out;
  for (const ImageRecord* r : images) out.push_back(Unit(HashId(r->image_id, seed_)));
  return out;
}

double RandomAntisymmetricPredictor::Preference(const ImageRecord& a,
                                                const ImageRecord& b) {
  if (a.image_id == b.image_id) return 0.5;
  const bool swapped = b.image_id < a.image_id;
  const std::string key = swapped ? CanonicalPairId(b.image_id, a.image_id)
                                  : CanonicalPairId(a.image_id, b.image_id);
  const double p = Unit(HashId(key, seed_));
  return swapped ? 1.0 - p : p;
}

namespace {

void AverageInto(TaskMetrics& avg, const std::map<Task, TaskMetrics>& rows) {
  double s[3] = {0, 0, 0};
  int n[3] = {0, 0, 0};
  for (const auto& [task, m] : rows) {
    if (!m.defined) continue;
    avg.n_images += m.n_images;
    avg.n_pairs += m.n_pairs;
    const std::optional<double>* v[3] = {&m.srcc, &m.plcc, &m.acc};
    for (int k = 0; k < 3; ++k) {
      if (*v[k]) {
        s[k] += **v[k];
        ++n[k];
      }
    }
  }
  std::optional<double>* out[3] = {&avg.srcc, &avg.plcc, &avg.acc};
  for (int k = 0; k < 3; ++k) {
    if (n[k] > 0) *out[k] = s[k] / n[k];
  }
  avg.defined = n[0] + n[1] + n[2] > 0;
}

}  // namespace

EvaluationReport Evaluate(QualityPredictor& predictor,
                          const DatasetManifest& manifest, const SplitSpec& split,
                          const EvaluationOptions& options) {
  if (split.test_pair_ids.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "test split is empty");
  }
  EvaluationReport report;
  report.dfl_enabled = predictor.dfl_enabled();
  report.checkpoint_id = predictor.checkpoint_id();
  report.split_seed = split.seed;
  report.split_fingerprint = SplitFingerprint(split);

  std::map<Task, std::vector<const ImageRecord*>> images;
  std::map<Task, std::vector<const PairRecord*>> pairs;
  std::set<std::string> seen;
  std::vector<const ImageRecord*> all_scored;
  for (const std::string& id : split.test_pair_ids) {
    const PairRecord& p = manifest.Pair(id);
    const Task task = manifest.PairTask(p);
    pairs[task];
    if (p.preference == Preference::kA || p.preference == Preference::kB) {
      pairs[task].push_back(&p);
    }
    for (const std::string* m : {&p.image_a, &p.image_b}) {
      const ImageRecord& r = manifest.Image(*m);
      if (!r.mos_norm || !seen.insert(r.image_id).second) continue;
      images[r.task].push_back(&r);
      all_scored.push_back(&r);
    }
  }
  std::sort(all_scored.begin(), all_scored.end(),
            [](const ImageRecord* x, const ImageRecord* y) { return x->image_id < y->image_id; });
  const std::vector<double> all_scores = predictor.Scores(all_scored);
  std::map<std::string, double> score_of;
  for (std::size_t i = 0; i < all_scored.size(); ++i) {
    score_of[all_scored[i]->image_id] = all_scores[i];
  }

  for (const auto& [task, task_pairs] : pairs) {
    TaskMetrics m;
    auto imgs = images[task];
    std::sort(imgs.begin(), imgs.end(),
              [](const ImageRecord* x, const ImageRecord* y) { return x->image_id < y->image_id; });
    m.n_images = static_cast<std::int64_t>(imgs.size());
    m.n_pairs = static_cast<std::int64_t>(task_pairs.size());
    m.defined = imgs.size() >= kMinScoredImages;
    if (m.defined) {
      std::vector<double> s, g;
      for (const ImageRecord* r : imgs) {
        s.push_back(score_of.at(r->image_id));
        g.push_back(*r->mos_norm);
      }
      m.srcc = Srcc(s, g);
      m.plcc = Plcc(s, g);
      if (!task_pairs.empty()) {
        std::vector<double> p_ab;
        std::vector<Preference> labels;
        for (const PairRecord* p : task_pairs) {
          p_ab.push_back(predictor.Preference(manifest.Image(p->image_a),
                                              manifest.Image(p->image_b)));
          labels.push_back(p->preference);
        }
        m.acc = PairwiseAccuracy(p_ab, labels);
      }
    }
    report.per_task[task] = m;
  }
  AverageInto(report.average, report.per_task);

  if (options.binned && !all_scored.empty()) {
    std::vector<double> mos;
    for (const ImageRecord* r : all_scored) mos.push_back(*r->mos_norm);
    report.binned = BinnedCorrelation(all_scores, mos, options.bin_edges);
  }
  return report;
}

namespace {

json OptionalJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptionalFrom(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json MetricsJson(const TaskMetrics& m) {
  return {{"defined", m.defined},   {"srcc", OptionalJson(m.srcc)},
          {"plcc", OptionalJson(m.plcc)}, {"acc", OptionalJson(m.acc)},
          {"n_images", m.n_images}, {"n_pairs", m.n_pairs}};
}

TaskMetrics MetricsFrom(const json& j) {
  TaskMetrics m;
  m.defined = j.value("defined", false);
  m.srcc = OptionalFrom(j, "srcc");
  m.plcc = OptionalFrom(j, "plcc");
  m.acc = OptionalFrom(j, "acc");
  m.n_images = j.value("n_images", std::int64_t{0});
  m.n_pairs = j.value("n_pairs", std::int64_t{0});
  return m;
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *v);
  return buf;
}

std::string SignedCell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.4f", *v);
  return buf;
}

std::optional<double> Diff(const std::optional<double>& a, const std::optional<double>& b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

MetricDelta DeltaOf(const TaskMetrics& a, const TaskMetrics& b) {
  return {Diff(a.srcc, b.srcc), Diff(a.plcc, b.plcc), Diff(a.acc, b.acc)};
}

json DeltaJson(const MetricDelta& d) {
  return {{"srcc", OptionalJson(d.srcc)},
          {"plcc", OptionalJson(d.plcc)},
          {"acc", OptionalJson(d.acc)}};
}

}  // namespace

std::string EvaluationReportToJson(const EvaluationReport& report) {
  json tasks = json::object();
  for (const auto& [task, m] : report.per_task) tasks[std::string(ToString(task))] = MetricsJson(m);
  json j = {{"format", "fgresq-evaluation"},
            {"average_convention", "unweighted mean over defined tasks"},
            {"per_task", tasks},
            {"average", MetricsJson(report.average)},
            {"config",
             {{"dfl_enabled", report.dfl_enabled},
              {"checkpoint_id", report.checkpoint_id},
              {"split_seed", report.split_seed},
              {"split_fingerprint", report.split_fingerprint}}}};
  if (report.binned) j["binned"] = json::parse(BinnedReportToJson(*report.binned));
  return j.dump(2) + "\n";
}

EvaluationReport EvaluationReportFromJson(std::string_view text) {
  EvaluationReport r;
  try {
    const json j = json::parse(text);
    for (const auto& [name, m] : j.at("per_task").items()) {
      r.per_task[ParseTask(name)] = MetricsFrom(m);
    }
    r.average = MetricsFrom(j.at("average"));
    const json& c = j.at("config");
    r.dfl_enabled = c.value("dfl_enabled", true);
    r.checkpoint_id = c.value("checkpoint_id", "");
    r.split_seed = c.value("split_seed", std::uint64_t{0});
    r.split_fingerprint = c.value("split_fingerprint", "");
    if (j.contains("binned")) r.binned = BinnedReportFromJson(j.at("binned").dump());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

std::string FormatEvaluationTable(const EvaluationReport& report) {
  std::ostringstream os;
  os << "# average: unweighted mean over defined tasks\n";
  os << "# dfl_enabled=" << (report.dfl_enabled ? "true" : "false")
     << " checkpoint=" << (report.checkpoint_id.empty() ? "-" : report.checkpoint_id)
     << " split_seed=" << report.split_seed << " split=" << report.split_fingerprint
     << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8s %8s\n", "Task", "SRCC",
                "PLCC", "ACC", "images", "pairs");
  os << line;
  auto row = [&](const std::string& name, const TaskMetrics& m) {
    std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8lld %8lld\n", name.c_str(),
                  Cell(m.srcc).c_str(), Cell(m.plcc).c_str(), Cell(m.acc).c_str(),
                  static_cast<long long>(m.n_images), static_cast<long long>(m.n_pairs));
    os << line;
  };
  for (Task task : kAllTasks) {
    auto it = report.per_task.find(task);
    if (it == report.per_task.end()) continue;
    TaskMetrics m = it->second;
    if (!m.defined) m.srcc = m.plcc = m.acc = std::nullopt;
    row(std::string(TaskTitle(task)), m);
  }
  row("Average", report.average);
  return os.str();
}

AblationDelta AblationCompare(const EvaluationReport& with_dfl,
                              const EvaluationReport& without_dfl) {
  if (with_dfl.split_fingerprint != without_dfl.split_fingerprint ||
      with_dfl.split_seed != without_dfl.split_seed) {
    throw Error(ErrorCode::kIncomparableReports,
                "reports were produced on different splits (" +
                    with_dfl.split_fingerprint + " vs " +
                    without_dfl.split_fingerprint + ")");
  }
  AblationDelta d;
  for (const auto& [task, m] : with_dfl.per_task) {
    auto it = without_dfl.per_task.find(task);
    if (it == without_dfl.per_task.end()) continue;
    d.per_task[task] = DeltaOf(m, it->second);
  }
  d.average = DeltaOf(with_dfl.average, without_dfl.average);
  return d;
}

std::string AblationDeltaToJson(const AblationDelta& delta) {
  json tasks = json::object();
  for (const auto& [task, d] : delta.per_task) tasks[std::string(ToString(task))] = DeltaJson(d);
  json j = {{"format", "fgresq-ablation"},
            {"convention", "with_dfl - without_dfl"},
            {"per_task", tasks},
            {"average", DeltaJson(delta.average)}};
  return j.dump(2) + "\n";
}

std::string FormatAblationTable(const AblationDelta& delta) {
  std::ostringstream os;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %9s %9s %9s\n", "Task", "dSRCC", "dPLCC", "dACC");
  os << line;
  auto row = [&](const std::string& name, const MetricDelta& d) {
    std::snprintf(line, sizeof(line), "%-12s %9s %9s %9s\n", name.c_str(),
                  SignedCell(d.srcc).c_str(), SignedCell(d.plcc).c_str(),
                  SignedCell(d.acc).c_str());
    os << line;
  };
  for (Task task : kAllTasks) {
    auto it = delta.per_task.find(task);
    if (it != delta.per_task.end()) row(std::string(TaskTitle(task)), it->second);
  }
  row("Average", delta.average);
  return os.str();
}

}  // namespace fgresq
