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

#include "cli.h"

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "fgresq/annotation.h"
#include "fgresq/annotation_server.h"
#include "fgresq/data_model.h"
#include "fgresq/error.h"
#include "fgresq/evaluation.h"
#include "fgresq/filtration.h"
#include "fgresq/metrics.h"
#include "fgresq/model.h"
#include "fgresq/synthetic.h"
#include "fgresq/trainer.h"

namespace fgresq::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::atomic<bool> g_stop{false};

extern "C" void HandleStopSignal(int) { g_stop = true; }

struct Globals {
  std::uint64_t seed = 0;
  std::string preset = "toy";
  std::string config_path;
  int threads = 0;
  bool seed_given = false;
};

struct Effective {
  ModelConfig model;
  TrainConfig train;
};

// preset < config file < flags, section by section.
Effective ResolveConfig(const Globals& g, const json& model_flags,
                        const json& train_flags, std::ostream& err) {
  json model = json::parse(ModelConfigToJson(g.preset == "paper" ? ModelConfig::Paper()
                                                                 : ModelConfig::Toy()));
  json train = json::parse(TrainConfigToJson(g.preset == "paper" ? TrainConfig::Paper()
                                                                 : TrainConfig::Toy()));
  std::optional<std::uint64_t> file_seed;
  if (!g.config_path.empty()) {
    json file;
    try {
      file = json::parse(ReadFile(g.config_path));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidArgument,
                  g.config_path + ": malformed config: " + e.what());
    }
    if (file.contains("model")) model.merge_patch(file["model"]);
    if (file.contains("train")) train.merge_patch(file["train"]);
    if (file.contains("seed")) file_seed = file["seed"].get<std::uint64_t>();
  }
  model.merge_patch(model_flags);
  train.merge_patch(train_flags);
  const std::uint64_t seed = g.seed_given ? g.seed : file_seed.value_or(g.seed);
  model["seed"] = seed;
  train["seed"] = seed;
  Effective e{ModelConfigFromJson(model.dump()), TrainConfigFromJson(train.dump())};
  e.model.Validate();
  e.train.Validate();
  err << "effective config: "
      << json{{"preset", g.preset},
              {"seed", seed},
              {"model", json::parse(ModelConfigToJson(e.model))},
              {"train", json::parse(TrainConfigToJson(e.train))}}
             .dump()
      << "\n";
  return e;
}

std::string DefaultRoot(const std::string& manifest_path, const std::string& root) {
  if (!root.empty()) return root;
  const fs::path parent = fs::path(manifest_path).parent_path();
  return parent.empty() ? "." : parent.string();
}

std::vector<double> ParseEdges(const std::string& text) {
  std::vector<double> edges;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      edges.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad bin edge '" + item + "'");
    }
  }
  return edges;
}

std::vector<Task> ParseTasks(const std::string& text) {
  std::vector<Task> tasks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) tasks.push_back(ParseTask(item));
  }
  return tasks;
}

// "image_id,score" per line; a non-numeric first line is taken as a header.
std::map<std::string, double> LoadScores(const std::string& path) {
  std::map<std::string, double> out;
  std::istringstream in(ReadFile(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  path + ":" + std::to_string(line_no) + ": expected image_id,score");
    }
    try {
      out[line.substr(0, comma)] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      if (line_no == 1) continue;
      throw Error(ErrorCode::kInvalidArgument,
                  path + ":" + std::to_string(line_no) + ": bad score");
    }
  }
  return out;
}

Preprocessing EvalPreprocessing(const Globals& g, const ModelConfig& model,
                                int resize_flag) {
  const TrainConfig preset = g.preset == "paper" ? TrainConfig::Paper() : TrainConfig::Toy();
  Preprocessing pre;
  pre.crop = model.image_size;
  pre.resize = resize_flag > 0 ? resize_flag
                               : static_cast<int>(std::lround(
                                     static_cast<double>(model.image_size) *
                                     preset.preprocessing.resize / preset.preprocessing.crop));
  if (pre.resize < pre.crop) {
    throw Error(ErrorCode::kInvalidArgument, "resize must be >= the model input size");
  }
  return pre;
}

std::string StatusTable(const FiltrationReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-20s %10s %14s %12s %8s\n", "scene", "coarse",
                "unnoticeable", "fine", "total");
  os << line;
  auto row = [&](const std::string& name, const StatusCounts& c) {
    std::snprintf(line, sizeof(line), "%-20s %10lld %14lld %12lld %8lld\n", name.c_str(),
                  static_cast<long long>(c.coarse_rejected),
                  static_cast<long long>(c.unnoticeable_rejected),
                  static_cast<long long>(c.fine_grained), static_cast<long long>(c.total()));
    os << line;
  };
  for (const auto& [scene, c] : report.per_scene) row(scene, c);
  row("total", report.total);
  return os.str();
}

void WriteReport(const std::string& path, std::string_view text) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  WriteFile(path, text);
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"fgresq: fine-grained image quality assessment workbench", "fgresq"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--preset", g.preset, "Config bundle")
      ->check(CLI::IsMember({"toy", "paper"}));
  app.add_option("--config", g.config_path, "JSON config with model/train sections");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  // synth
  std::string synth_out, synth_tasks = "deblurring,denoising,dehazing";
  int synth_contents = 4, synth_per_content = 5, synth_size = 72;
  bool synth_labelled = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--tasks", synth_tasks, "Comma-separated tasks");
  synth->add_option("--contents", synth_contents, "Contents per task");
  synth->add_option("--images-per-content", synth_per_content, "Images per content group");
  synth->add_option("--size", synth_size, "Image side length");
  synth->add_flag("--labelled", synth_labelled,
                  "Keep normalized scores and score-labelled fine-grained pairs");

  // ingest
  std::string in_manifest, out_manifest;
  auto* ingest = app.add_subcommand("ingest", "Validate a manifest and normalize scores");
  ingest->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  ingest->add_option("--out", out_manifest, "Output manifest (JSONL)")->required();

  // pairgen
  auto* pairgen = app.add_subcommand("pairgen", "Generate same-content candidate pairs");
  pairgen->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  pairgen->add_option("--out", out_manifest, "Output manifest (JSONL)")->required();

  // calibrate-jnd
  std::string image_root, calib_out;
  std::size_t calib_sample = 200;
  bool random_sign = false;
  auto* calibrate = app.add_subcommand("calibrate-jnd", "Estimate the SSIM visibility threshold");
  calibrate->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  calibrate->add_option("--images", image_root, "Image root (default: manifest dir)");
  calibrate->add_option("--sample", calib_sample, "Images to sample");
  calibrate->add_option("--out", calib_out, "Calibration JSON to write")->required();
  calibrate->add_flag("--random-sign", random_sign, "Seeded random sign for the JND noise");

  // filter
  std::string calib_in, report_path;
  double tau_d = -1.0;
  auto* filter = app.add_subcommand("filter", "Classify candidate pairs");
  filter->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  filter->add_option("--images", image_root, "Image root (default: manifest dir)");
  filter->add_option("--calibration", calib_in, "Calibration JSON from calibrate-jnd")->required();
  filter->add_option("--out", out_manifest, "Output manifest (JSONL)")->required();
  filter->add_option("--report", report_path, "Report JSON to write");
  auto* tau_opt = filter->add_option("--tau-d", tau_d, "Override every scene's score gap");

  // split
  double ratio = 0.8;
  std::string split_path;
  auto* split = app.add_subcommand("split", "Split fine-grained pairs into train/test");
  split->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  split->add_option("--ratio", ratio, "Train fraction of fine-grained pairs");
  split->add_option("--out", split_path, "Split JSON")->required();

  // annotate-serve
  std::string annotators_path, log_path, host = "127.0.0.1", port_file;
  int port = 8080;
  bool revote = false, majority = false;
  auto* serve = app.add_subcommand("annotate-serve", "Run the annotation HTTP service");
  serve->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  serve->add_option("--images", image_root, "Image root (default: manifest dir)");
  serve->add_option("--annotators", annotators_path, "Annotator profiles (JSON array)")->required();
  serve->add_option("--log", log_path, "Append-only annotation log")->required();
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "0 picks a free port");
  serve->add_option("--port-file", port_file, "Write the bound port here");
  serve->add_flag("--revote", revote, "Re-vote disagreements before expert review");
  serve->add_flag("--majority", majority, "Auto-label strict majorities");

  // export
  std::string dump_path;
  auto* exporter = app.add_subcommand("export", "Write final labels and the record dump");
  exporter->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  exporter->add_option("--annotators", annotators_path, "Annotator profiles (JSON array)")->required();
  exporter->add_option("--log", log_path, "Append-only annotation log")->required();
  exporter->add_option("--out", out_manifest, "Output manifest (JSONL)")->required();
  exporter->add_option("--dump", dump_path, "Record dump (JSONL) to write");
  exporter->add_flag("--revote", revote, "Campaign ran with re-voting");
  exporter->add_flag("--majority", majority, "Campaign ran with majority labels");

  // train
  std::string out_dir;
  int epochs = 0, alignment_epochs = 0, feature_dim = 0, resize = 0;
  double lr = 0.0, lambda1 = 0.0, lambda2 = 0.0;
  std::size_t batch_size = 0;
  bool no_dfl = false, exclude_equal = false;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  train->add_option("--images", image_root, "Image root (default: manifest dir)");
  train->add_option("--split", split_path, "Split JSON")->required();
  train->add_option("--out-dir", out_dir, "Run directory")->required();
  auto* epochs_opt = train->add_option("--epochs", epochs, "Quality-training epochs");
  auto* align_opt = train->add_option("--alignment-epochs", alignment_epochs, "Alignment-stage epochs");
  auto* lr_opt = train->add_option("--lr", lr, "Peak learning rate");
  auto* batch_opt = train->add_option("--batch-size", batch_size, "Images per batch");
  auto* l1_opt = train->add_option("--lambda1", lambda1, "Scene loss weight");
  auto* l2_opt = train->add_option("--lambda2", lambda2, "Ranking loss weight");
  auto* dim_opt = train->add_option("--feature-dim", feature_dim, "Feature width d");
  auto* resize_opt = train->add_option("--resize", resize, "Resize side before cropping");
  auto* no_dfl_opt = train->add_flag("--no-dfl", no_dfl, "Disable the degradation branch");
  auto* excl_opt = train->add_flag("--exclude-equal", exclude_equal,
                                   "Drop equal-labelled pairs from the ranking loss");

  // eval
  std::string checkpoint;
  bool binned = false;
  std::string edges_text = "0,0.2,0.4,0.6,0.8,1.0";
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  eval->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  eval->add_option("--images", image_root, "Image root (default: manifest dir)");
  eval->add_option("--split", split_path, "Split JSON")->required();
  eval->add_option("--report", report_path, "Report JSON to write")->required();
  eval->add_option("--resize", resize, "Resize side before cropping");
  eval->add_flag("--binned", binned, "Add the per-range analysis");
  eval->add_option("--edges", edges_text, "Comma-separated bin edges");

  // bins
  std::string scores_path;
  auto* bins = app.add_subcommand("bins", "Correlation within score ranges");
  bins->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  bins->add_option("--scores", scores_path, "CSV of image_id,score");
  bins->add_option("--checkpoint", checkpoint, "Checkpoint JSON");
  bins->add_option("--images", image_root, "Image root (default: manifest dir)");
  bins->add_option("--split", split_path, "Restrict to test-split images");
  bins->add_option("--edges", edges_text, "Comma-separated bin edges");
  bins->add_option("--report", report_path, "Report JSON to write");
  bins->add_option("--resize", resize, "Resize side before cropping");

  // consistency
  double resolution = 0.05;
  auto* consistency = app.add_subcommand("consistency", "Preference vs score-gap agreement");
  consistency->add_option("--manifest", in_manifest, "Input manifest (JSONL)")->required();
  consistency->add_option("--resolution", resolution, "Score-gap cell width");
  consistency->add_option("--report", report_path, "Report JSON to write");

  // ablation
  std::string with_path, without_path;
  auto* ablation = app.add_subcommand("ablation", "Compare reports with and without DFL");
  ablation->add_option("--with", with_path, "Evaluation report with DFL")->required();
  ablation->add_option("--without", without_path, "Evaluation report without DFL")->required();
  ablation->add_option("--report", report_path, "Report JSON to write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (synth->parsed()) {
      SyntheticDatasetOptions o;
      o.tasks = ParseTasks(synth_tasks);
      o.contents_per_task = synth_contents;
      o.images_per_content = synth_per_content;
      o.image_size = synth_size;
      o.seed = g.seed;
      SyntheticDataset ds = BuildSyntheticDataset(o);
      if (!synth_labelled) {
        ds.manifest.pairs.clear();
        for (auto& r : ds.manifest.images) r.mos_norm.reset();
        ds.manifest.Rebuild();
      }
      WriteSyntheticDataset(ds, synth_out);
      out << "wrote " << ds.manifest.images.size() << " images, "
          << ds.manifest.pairs.size() << " pairs to " << synth_out << "\n";
    } else if (ingest->parsed()) {
      DatasetManifest m = NormalizeManifestMos(LoadManifest(in_manifest));
      std::map<std::string, std::int64_t> counts;
      for (const auto& r : m.images) ++counts[r.scene_id];
      for (auto& s : m.scenes) s.sample_count = counts[s.scene_id];
      m.Rebuild();
      SaveManifest(m, out_manifest);
      out << "ingested " << m.images.size() << " images in " << m.scenes.size()
          << " scenes\n";
    } else if (pairgen->parsed()) {
      DatasetManifest m = LoadManifest(in_manifest);
      m.pairs = GeneratePairs(m);
      m.Rebuild();
      SaveManifest(m, out_manifest);
      out << "candidate pairs: " << m.pairs.size() << "\n";
    } else if (calibrate->parsed()) {
      const DatasetManifest m = LoadManifest(in_manifest);
      const ImageLoader loader = DirectoryImageLoader(DefaultRoot(in_manifest, image_root));
      std::vector<Image> sample;
      for (const ImageRecord* r : SelectCalibrationSample(m, calib_sample, g.seed)) {
        sample.push_back(loader(*r));
      }
      CalibrationOptions options;
      if (random_sign) options.random_sign_seed = g.seed;
      JndCalibration c = CalibrateJndThreshold(sample, options);
      c.seed = g.seed;
      WriteReport(calib_out, CalibrationToJson(c));
      char line[96];
      std::snprintf(line, sizeof(line), "ssim_med %.6f over %lld images\n", c.ssim_med,
                    static_cast<long long>(c.sample_size));
      out << line;
    } else if (filter->parsed()) {
      const DatasetManifest m = LoadManifest(in_manifest);
      FiltrationConfig config;
      if (tau_opt->count()) config.tau_d_override = tau_d;
      config.threads = g.threads;
      const FiltrationResult result =
          RunFiltration(m, CalibrationFromJson(ReadFile(calib_in)),
                        DirectoryImageLoader(DefaultRoot(in_manifest, image_root)), config);
      SaveManifest(result.manifest, out_manifest);
      WriteReport(report_path, FiltrationReportToJson(result.report));
      out << StatusTable(result.report);
    } else if (split->parsed()) {
      const DatasetManifest m = LoadManifest(in_manifest);
      const SplitSpec s = SplitByPairs(m, ratio, g.seed);
      SaveSplit(s, split_path);
      out << "train " << s.train_pair_ids.size() << " test " << s.test_pair_ids.size()
          << " shared images " << SplitImageLeakage(m, s) << " fingerprint "
          << SplitFingerprint(s) << "\n";
    } else if (serve->parsed()) {
      AnnotationService service(LoadManifest(in_manifest), LoadAnnotators(annotators_path),
                                {log_path, g.seed, revote, majority});
      AnnotationHttpServer server(service, DefaultRoot(in_manifest, image_root));
      const int bound = server.Start(host, port);
      if (!port_file.empty()) WriteReport(port_file, std::to_string(bound) + "\n");
      out << "listening on " << host << ":" << bound << "\n" << std::flush;
      g_stop = false;
      std::signal(SIGINT, HandleStopSignal);
      std::signal(SIGTERM, HandleStopSignal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      server.Stop();
      out << "stopped\n";
    } else if (exporter->parsed()) {
      AnnotationService service(LoadManifest(in_manifest), LoadAnnotators(annotators_path),
                                {log_path, g.seed, revote, majority});
      const AnnotationExport ex = service.Export();
      SaveManifest(ex.manifest, out_manifest);
      WriteReport(dump_path, ex.dump);
      out << "exported " << ex.preferences.size() << " preferences and "
          << ex.resolutions.size() << " resolutions\n";
    } else if (train->parsed()) {
      json model_flags = json::object();
      json train_flags = json::object();
      if (epochs_opt->count()) train_flags["epochs"] = epochs;
      if (align_opt->count()) train_flags["alignment_epochs"] = alignment_epochs;
      if (lr_opt->count()) train_flags["max_lr"] = lr;
      if (batch_opt->count()) train_flags["batch_size"] = batch_size;
      if (l1_opt->count()) train_flags["lambda1"] = lambda1;
      if (l2_opt->count()) train_flags["lambda2"] = lambda2;
      if (resize_opt->count()) train_flags["resize"] = resize;
      if (excl_opt->count()) train_flags["include_equal"] = false;
      if (dim_opt->count()) model_flags["feature_dim"] = feature_dim;
      if (no_dfl_opt->count()) model_flags["dfl_enabled"] = false;
      train_flags["checkpoint_dir"] = (fs::path(out_dir) / "checkpoints").string();
      Effective e = ResolveConfig(g, model_flags, train_flags, err);
      const DatasetManifest m = LoadManifest(in_manifest);
      const SplitSpec s = LoadSplit(split_path);
      FgresqModel model(e.model);
      fs::create_directories(out_dir);
      const TrainResult r = Train(model, m, s,
                                  DirectoryImageLoader(DefaultRoot(in_manifest, image_root)),
                                  e.train);
      WriteFile((fs::path(out_dir) / "loss_curve.csv").string(), LossCurveToCsv(r.curve));
      std::ostringstream align;
      align.precision(10);
      align << "step,loss,lr\n";
      for (const auto& a : r.alignment_curve) align << a.step << ',' << a.loss << ',' << a.lr << '\n';
      WriteFile((fs::path(out_dir) / "alignment_curve.csv").string(), align.str());
      out << "trained " << r.steps << " steps; final checkpoint "
          << (r.checkpoints.empty() ? "-" : r.checkpoints.back()) << "\n";
    } else if (eval->parsed()) {
      CheckpointMetadata meta;
      const auto model = LoadCheckpoint(checkpoint, &meta);
      const DatasetManifest m = LoadManifest(in_manifest);
      ModelPredictor predictor(*model, DirectoryImageLoader(DefaultRoot(in_manifest, image_root)),
                               EvalPreprocessing(g, model->config(), resize),
                               meta.checkpoint_id, g.threads);
      EvaluationOptions options;
      options.binned = binned;
      options.bin_edges = ParseEdges(edges_text);
      const EvaluationReport report = Evaluate(predictor, m, LoadSplit(split_path), options);
      WriteReport(report_path, EvaluationReportToJson(report));
      out << FormatEvaluationTable(report);
      if (report.binned) out << FormatBinnedTable(*report.binned, "binned");
    } else if (bins->parsed()) {
      const DatasetManifest m = LoadManifest(in_manifest);
      if (scores_path.empty() == checkpoint.empty()) {
        throw CLI::ValidationError("bins", "exactly one of --scores or --checkpoint is required");
      }
      std::vector<const ImageRecord*> images;
      if (!split_path.empty()) {
        std::set<std::string> ids;
        for (const auto& id : LoadSplit(split_path).test_pair_ids) {
          const PairRecord& p = m.Pair(id);
          ids.insert(p.image_a);
          ids.insert(p.image_b);
        }
        for (const auto& id : ids) images.push_back(&m.Image(id));
      } else {
        for (const auto& r : m.images) images.push_back(&r);
      }
      std::erase_if(images, [](const ImageRecord* r) { return !r->mos_norm; });
      std::vector<double> scores;
      if (!scores_path.empty()) {
        const auto table = LoadScores(scores_path);
        for (const ImageRecord* r : images) {
          auto it = table.find(r->image_id);
          if (it == table.end()) {
            throw Error(ErrorCode::kNotFound, "no score for image '" + r->image_id + "'");
          }
          scores.push_back(it->second);
        }
      } else {
        const auto model = LoadCheckpoint(checkpoint);
        ModelPredictor predictor(*model, DirectoryImageLoader(DefaultRoot(in_manifest, image_root)),
                                 EvalPreprocessing(g, model->config(), resize), "", g.threads);
        scores = predictor.Scores(images);
      }
      std::vector<double> mos;
      for (const ImageRecord* r : images) mos.push_back(*r->mos_norm);
      const BinnedReport report = BinnedCorrelation(scores, mos, ParseEdges(edges_text));
      WriteReport(report_path, BinnedReportToJson(report));
      out << FormatBinnedTable(report, scores_path.empty() ? "model" : "scores");
    } else if (consistency->parsed()) {
      const DatasetManifest m = LoadManifest(in_manifest);
      const ConsistencyReport report = ConsistencyAnalysis(CollectObservations(m), resolution);
      WriteReport(report_path, ConsistencyReportToJson(report));
      out << FormatConsistencyTable(report);
    } else if (ablation->parsed()) {
      const AblationDelta d =
          AblationCompare(EvaluationReportFromJson(ReadFile(with_path)),
                          EvaluationReportFromJson(ReadFile(without_path)));
      WriteReport(report_path, AblationDeltaToJson(d));
      out << FormatAblationTable(d);
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace fgresq::cli
