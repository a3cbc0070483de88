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

#include "fgresq/model.h"

#include <cmath>
#include <nlohmann/json.hpp>

#include "fgresq/data_model.h"
#include "fgresq/error.h"
#include "fgresq/random.h"
#include "fgresq/text_anchors.h"

namespace fgresq {
namespace {

using nlohmann::json;

constexpr float kPixelMean = 127.5f;
constexpr float kPixelScale = 63.75f;

ad::Matrix Xavier(Rng& rng, int in, int out) {
  const double limit = std::sqrt(6.0 / (in + out));
  ad::Matrix m(in, out);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-limit, limit);
  }
  return m;
}

Linear MakeLinear(ParameterStore& store, Rng& rng, const std::string& name,
                  int in, int out) {
  Linear l;
  l.weight = store.Add(name + ".weight", Xavier(rng, in, out));
  l.bias = store.Add(name + ".bias", ad::Matrix::Zero(1, out));
  return l;
}

Mlp MakeMlp(ParameterStore& store, Rng& rng, const std::string& name, int in,
            int hidden, int out) {
  return {MakeLinear(store, rng, name + ".hidden", in, hidden),
          MakeLinear(store, rng, name + ".output", hidden, out)};
}

ad::Matrix RowOf(const Eigen::VectorXd& v) { return v.transpose(); }

json ConfigToJson(const ModelConfig& c) {
  return {{"feature_dim", c.feature_dim},
          {"prompt_count", c.prompt_count},
          {"backbone_scale", ToString(c.backbone_scale)},
          {"dfl_enabled", c.dfl_enabled},
          {"encoder_width", c.encoder_width},
          {"mixer_hidden", c.mixer_hidden},
          {"head_hidden", c.head_hidden},
          {"image_size", c.image_size},
          {"patch_size", c.patch_size},
          {"channels", c.channels},
          {"logit_scale_init", c.logit_scale_init},
          {"anchor_template", c.anchor_template},
          {"seed", c.seed}};
}

ModelConfig ConfigFromJson(const json& j) {
  ModelConfig c;
  if (j.contains("backbone_scale") &&
      j["backbone_scale"].get<std::string>() == "paper") {
    c = ModelConfig::Paper();
  }
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.prompt_count = j.value("prompt_count", c.prompt_count);
  c.dfl_enabled = j.value("dfl_enabled", c.dfl_enabled);
  c.encoder_width = j.value("encoder_width", c.encoder_width);
  c.mixer_hidden = j.value("mixer_hidden", c.mixer_hidden);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.image_size = j.value("image_size", c.image_size);
  c.patch_size = j.value("patch_size", c.patch_size);
  c.channels = j.value("channels", c.channels);
  c.logit_scale_init = j.value("logit_scale_init", c.logit_scale_init);
  c.anchor_template = j.value("anchor_template", c.anchor_template);
  c.seed = j.value("seed", c.seed);
  return c;
}

}  // namespace

std::string ModelConfigToJson(const ModelConfig& config) {
  return ConfigToJson(config).dump();
}

ModelConfig ModelConfigFromJson(std::string_view text) {
  try {
    return ConfigFromJson(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed model config: ") + e.what());
  }
}

std::string ToString(BackboneScale scale) {
  return scale == BackboneScale::kPaper ? "paper" : "toy";
}

BackboneScale ParseBackboneScale(std::string_view name) {
  if (name == "toy") return BackboneScale::kToy;
  if (name == "paper") return BackboneScale::kPaper;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown backbone scale '" + std::string(name) + "'");
}

ModelConfig ModelConfig::Toy() { return ModelConfig{}; }

ModelConfig ModelConfig::Paper() {
  ModelConfig c;
  c.backbone_scale = BackboneScale::kPaper;
  c.feature_dim = 512;
  c.encoder_width = 768;
  c.mixer_hidden = 512;
  c.head_hidden = 512;
  c.image_size = 224;
  c.patch_size = 16;
  return c;
}

void ModelConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "model config: " + what);
  };
  if (feature_dim < 8) fail("feature_dim must be >= 8");
  if (prompt_count < 1) fail("prompt_count must be >= 1");
  if (patch_size < 1 || image_size < patch_size || image_size % patch_size != 0) {
    fail("image_size must be a positive multiple of patch_size");
  }
  if (channels != 1 && channels != 3) fail("channels must be 1 or 3");
  if (encoder_width < 1 || mixer_hidden < 1 || head_hidden < 1) {
    fail("layer widths must be positive");
  }
}

ad::Var ParameterStore::Add(const std::string& name, ad::Matrix init,
                            bool trainable) {
  if (index_.contains(name)) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate parameter " + name);
  }
  index_[name] = params_.size();
  params_.push_back({name, ad::Leaf(std::move(init), trainable), trainable});
  return params_.back().var;
}

const ad::Var& ParameterStore::Get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown parameter " + name);
  }
  return params_[it->second].var;
}

void ParameterStore::SetTrainable(const std::string& prefix, bool trainable) {
  for (auto& p : params_) {
    if (p.name.starts_with(prefix)) {
      p.trainable = trainable;
      p.var.node().requires_grad = trainable;
      p.var.node().ZeroGrad();
    }
  }
}

void ParameterStore::ZeroGrad() {
  for (auto& p : params_) p.var.node().ZeroGrad();
}

std::size_t ParameterStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (p.trainable) n += static_cast<std::size_t>(p.var.value().size());
  }
  return n;
}

ad::Var Linear::Forward(ad::Tape& t, const ad::Var& x) const {
  return ad::AddRow(t, ad::MatMul(t, x, weight), bias);
}

ad::Var Mlp::Forward(ad::Tape& t, const ad::Var& x) const {
  return output.Forward(t, ad::Gelu(t, hidden.Forward(t, x)));
}

FgresqModel::FgresqModel(const ModelConfig& config) : config_(config) {
  config_.Validate();
  const int d = config_.feature_dim;
  const int k = config_.prompt_count;
  Rng general_rng(DeriveSeed(config_.seed, 1));
  Rng degradation_rng(DeriveSeed(config_.seed, 2));
  Rng fusion_rng(DeriveSeed(config_.seed, 3));
  Rng head_rng(DeriveSeed(config_.seed, 4));

  general_.embed = MakeLinear(params_, general_rng, "general.embed",
                              config_.patch_dim(), config_.encoder_width);
  general_.project = MakeLinear(params_, general_rng, "general.project",
                                config_.encoder_width, d);
  degradation_.embed = MakeLinear(params_, degradation_rng, "degradation.embed",
                                  config_.patch_dim(), config_.encoder_width);
  degradation_.project = MakeLinear(params_, degradation_rng,
                                    "degradation.project",
                                    config_.encoder_width, d);
  log_logit_scale_ = params_.Add(
      "degradation.log_logit_scale",
      ad::Matrix::Constant(1, 1, std::log(config_.logit_scale_init)));

  ad::Matrix prompts(k, d);
  const double prompt_std = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < prompts.size(); ++i) {
    prompts.data()[i] = fusion_rng.normal(0.0, prompt_std);
  }
  prompts_ = params_.Add("fusion.prompts", prompts);
  mixer_1_ = MakeMlp(params_, fusion_rng, "fusion.mixer_1", d,
                     config_.mixer_hidden, d);
  mixer_2_ = MakeMlp(params_, fusion_rng, "fusion.mixer_2", d,
                     config_.mixer_hidden, k);
  regression_ = MakeMlp(params_, head_rng, "regression", 3 * d,
                        config_.head_hidden, 1);
  comparison_ = MakeMlp(params_, head_rng, "comparison", 9 * d,
                        config_.head_hidden, 1);
  anchors_ = BuildTextAnchors(d, config_.anchor_template);
}

Image FgresqModel::PrepareInput(const Image& image) const {
  if (image.empty()) throw Error(ErrorCode::kEmptyImage, "empty model input");
  Image sized = Resize(image, config_.image_size, config_.image_size);
  if (sized.channels() == config_.channels) return sized;
  if (config_.channels == 1) return ToLuminance(sized);
  if (sized.channels() == 1) {
    Image out(sized.width(), sized.height(), config_.channels);
    for (int y = 0; y < sized.height(); ++y) {
      for (int x = 0; x < sized.width(); ++x) {
        for (int c = 0; c < config_.channels; ++c) out.at(x, y, c) = sized.at(x, y);
      }
    }
    return out;
  }
  throw Error(ErrorCode::kDimension, "unsupported channel count for model input");
}

ad::Matrix FgresqModel::Patchify(std::span<const Image> images) const {
  const int p = config_.patch_size;
  const int grid = config_.image_size / p;
  const int per_image = grid * grid;
  ad::Matrix out(static_cast<Eigen::Index>(images.size()) * per_image,
                 config_.patch_dim());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& img = images[i];
    if (img.width() != config_.image_size || img.height() != config_.image_size ||
        img.channels() != config_.channels) {
      throw Error(ErrorCode::kDimension,
                  "model input must be " + std::to_string(config_.image_size) +
                      "x" + std::to_string(config_.image_size) + "x" +
                      std::to_string(config_.channels));
    }
    for (int gy = 0; gy < grid; ++gy) {
      for (int gx = 0; gx < grid; ++gx) {
        const Eigen::Index row =
            static_cast<Eigen::Index>(i) * per_image + gy * grid + gx;
        Eigen::Index col = 0;
        for (int c = 0; c < config_.channels; ++c) {
          for (int dy = 0; dy < p; ++dy) {
            for (int dx = 0; dx < p; ++dx) {
              out(row, col++) =
                  (img.at(gx * p + dx, gy * p + dy, c) - kPixelMean) / kPixelScale;
            }
          }
        }
      }
    }
  }
  return out;
}

ad::Var FgresqModel::RunEncoder(ad::Tape& t, const PatchEncoder& enc,
                                const ad::Matrix& patches) const {
  if (patches.cols() != config_.patch_dim() ||
      patches.rows() % config_.patches_per_image() != 0) {
    throw Error(ErrorCode::kDimension, "patch matrix has the wrong shape");
  }
  const ad::Var x = ad::Constant(patches);
  const ad::Var hidden = ad::Gelu(t, enc.embed.Forward(t, x));
  const ad::Var pooled = ad::SegmentMeanRows(t, hidden, config_.patches_per_image());
  return enc.project.Forward(t, pooled);
}

ad::Var FgresqModel::EncodeGeneral(ad::Tape& t, const ad::Matrix& patches) const {
  return RunEncoder(t, general_, patches);
}

ad::Var FgresqModel::EncodeDegradation(ad::Tape& t,
                                       const ad::Matrix& patches) const {
  return ad::L2NormalizeRows(t, RunEncoder(t, degradation_, patches));
}

ad::Var FgresqModel::LogitScale(ad::Tape& t) const {
  return ad::Exp(t, log_logit_scale_);
}

FusedBatch FgresqModel::Fuse(ad::Tape& t, const ad::Var& f_g,
                             const ad::Var& f_d) const {
  const int d = config_.feature_dim;
  if (f_g.cols() != d) throw Error(ErrorCode::kDimension, "f_g has wrong width");
  FusedBatch out;
  out.f_g = f_g;
  if (config_.dfl_enabled) {
    if (!f_d || f_d.cols() != d || f_d.rows() != f_g.rows()) {
      throw Error(ErrorCode::kDimension, "f_d does not match f_g");
    }
    out.f_d = f_d;
    out.weights = ad::SoftmaxRows(t, mixer_2_.Forward(t, f_d));
    out.f_p = mixer_1_.Forward(t, ad::MatMul(t, out.weights, prompts_));
  } else {
    out.f_p = ad::Constant(ad::Matrix::Zero(f_g.rows(), d));
  }
  const std::array<ad::Var, 3> parts = {f_g, out.f_p, ad::Add(t, f_g, out.f_p)};
  out.f_q = ad::ConcatCols(t, parts);
  return out;
}

FusedBatch FgresqModel::Forward(ad::Tape& t, const ad::Matrix& patches) const {
  const ad::Var f_g = EncodeGeneral(t, patches);
  ad::Var f_d;
  if (config_.dfl_enabled) f_d = EncodeDegradation(t, patches);
  return Fuse(t, f_g, f_d);
}

ad::Var FgresqModel::PredictScore(ad::Tape& t, const ad::Var& f_q) const {
  if (f_q.cols() != 3 * config_.feature_dim) {
    throw Error(ErrorCode::kDimension, "f_q must have 3d columns");
  }
  return regression_.Forward(t, f_q);
}

ad::Var FgresqModel::PreferenceLogit(ad::Tape& t, const ad::Var& f_q_a,
                                     const ad::Var& f_q_b) const {
  if (f_q_a.cols() != 3 * config_.feature_dim ||
      f_q_b.cols() != 3 * config_.feature_dim || f_q_a.rows() != f_q_b.rows()) {
    throw Error(ErrorCode::kDimension, "comparison head input shape mismatch");
  }
  const std::array<ad::Var, 3> ab = {f_q_a, f_q_b, ad::Sub(t, f_q_a, f_q_b)};
  const std::array<ad::Var, 3> ba = {f_q_b, f_q_a, ad::Sub(t, f_q_b, f_q_a)};
  const ad::Var h_ab = comparison_.Forward(t, ad::ConcatCols(t, ab));
  const ad::Var h_ba = comparison_.Forward(t, ad::ConcatCols(t, ba));
  return ad::Scale(t, ad::Sub(t, h_ab, h_ba), 0.5);
}

ad::Var FgresqModel::PredictPreference(ad::Tape& t, const ad::Var& f_q_a,
                                       const ad::Var& f_q_b) const {
  return ad::Sigmoid(t, PreferenceLogit(t, f_q_a, f_q_b));
}

std::vector<QualityFeatures> FgresqModel::Features(
    std::span<const Image> images) const {
  std::vector<Image> prepared;
  prepared.reserve(images.size());
  for (const auto& img : images) prepared.push_back(PrepareInput(img));
  ad::Tape t(false);
  const FusedBatch fused = Forward(t, Patchify(prepared));
  std::vector<QualityFeatures> out(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out[i].f_g = fused.f_g.value().row(r).transpose();
    if (fused.f_d) out[i].f_d = fused.f_d.value().row(r).transpose();
    if (fused.weights) out[i].prompt_weights = fused.weights.value().row(r).transpose();
    out[i].f_p = fused.f_p.value().row(r).transpose();
    out[i].f_q = fused.f_q.value().row(r).transpose();
  }
  return out;
}

QualityFeatures FgresqModel::Fuse(const Eigen::VectorXd& f_g,
                                  const Eigen::VectorXd& f_d) const {
  ad::Tape t(false);
  const ad::Var d_var = f_d.size() > 0 ? ad::Constant(RowOf(f_d)) : ad::Var();
  const FusedBatch fused = Fuse(t, ad::Constant(RowOf(f_g)), d_var);
  QualityFeatures out;
  out.f_g = f_g;
  out.f_d = f_d;
  if (fused.weights) out.prompt_weights = fused.weights.value().row(0).transpose();
  out.f_p = fused.f_p.value().row(0).transpose();
  out.f_q = fused.f_q.value().row(0).transpose();
  return out;
}

Eigen::VectorXd FgresqModel::EncodeDegradation(const Image& image) const {
  ad::Tape t(false);
  const Image prepared = PrepareInput(image);
  return EncodeDegradation(t, Patchify(std::span<const Image>(&prepared, 1)))
      .value()
      .row(0)
      .transpose();
}

double FgresqModel::PredictScore(const QualityFeatures& features) const {
  ad::Tape t(false);
  return PredictScore(t, ad::Constant(RowOf(features.f_q))).scalar();
}

double FgresqModel::PredictPreference(const QualityFeatures& a,
                                      const QualityFeatures& b) const {
  ad::Tape t(false);
  return PredictPreference(t, ad::Constant(RowOf(a.f_q)),
                           ad::Constant(RowOf(b.f_q)))
      .scalar();
}

int FgresqModel::NearestAnchor(const Eigen::VectorXd& f_d) const {
  Eigen::Index best = 0;
  (anchors_ * f_d).maxCoeff(&best);
  return static_cast<int>(best);
}

void FgresqModel::SetDegradationTrainable(bool trainable) {
  params_.SetTrainable("degradation.", trainable);
}

std::string CheckpointToJson(const FgresqModel& model,
                             const CheckpointMetadata& metadata) {
  json params = json::array();
  for (const auto& p : model.parameters().all()) {
    const auto& v = p.var.value();
    std::vector<double> data(v.data(), v.data() + v.size());
    params.push_back({{"name", p.name},
                      {"rows", v.rows()},
                      {"cols", v.cols()},
                      {"trainable", p.trainable},
                      {"data", data}});
  }
  json obj = {{"format", "fgresq-checkpoint"},
              {"version", kCheckpointVersion},
              {"config", ConfigToJson(model.config())},
              {"metadata",
               {{"checkpoint_id", metadata.checkpoint_id},
                {"epoch", metadata.epoch},
                {"step", metadata.step}}},
              {"parameters", params}};
  return obj.dump() + "\n";
}

std::unique_ptr<FgresqModel> CheckpointFromJson(std::string_view text,
                                                CheckpointMetadata* metadata) {
  try {
    const json obj = json::parse(text);
    if (obj.value("format", std::string()) != "fgresq-checkpoint") {
      throw Error(ErrorCode::kMalformedCheckpoint, "not an fgresq checkpoint");
    }
    if (obj.value("version", 0) > kCheckpointVersion) {
      throw Error(ErrorCode::kMalformedCheckpoint,
                  "checkpoint version is newer than this build supports");
    }
    auto model = std::make_unique<FgresqModel>(ConfigFromJson(obj.at("config")));
    auto& store = model->parameters();
    for (const auto& p : obj.at("parameters")) {
      const std::string name = p.at("name").get<std::string>();
      const ad::Var& var = store.Get(name);
      const auto rows = p.at("rows").get<Eigen::Index>();
      const auto cols = p.at("cols").get<Eigen::Index>();
      const auto data = p.at("data").get<std::vector<double>>();
      if (rows != var.rows() || cols != var.cols() ||
          static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw Error(ErrorCode::kMalformedCheckpoint,
                    "parameter " + name + " has the wrong shape");
      }
      var.node().value = Eigen::Map<const ad::Matrix>(data.data(), rows, cols);
      if (p.contains("trainable")) {
        store.SetTrainable(name, p["trainable"].get<bool>());
      }
    }
    if (metadata != nullptr && obj.contains("metadata")) {
      const auto& m = obj["metadata"];
      metadata->checkpoint_id = m.value("checkpoint_id", std::string());
      metadata->epoch = m.value("epoch", std::int64_t{0});
      metadata->step = m.value("step", std::int64_t{0});
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedCheckpoint,
                std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformedCheckpoint) throw;
    throw Error(ErrorCode::kMalformedCheckpoint,
                std::string("malformed checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const FgresqModel& model, const CheckpointMetadata& metadata,
                    const std::string& path) {
  WriteFile(path, CheckpointToJson(model, metadata));
}

std::unique_ptr<FgresqModel> LoadCheckpoint(const std::string& path,
                                            CheckpointMetadata* metadata) {
  return CheckpointFromJson(ReadFile(path), metadata);
}

std::vector<ad::Matrix> SnapshotParameters(const FgresqModel& model) {
  std::vector<ad::Matrix> out;
  for (const auto& p : model.parameters().all()) out.push_back(p.var.value());
  return out;
}

void RestoreParameters(FgresqModel& model, std::span<const ad::Matrix> values) {
  auto params = model.parameters().all();
  if (values.size() != params.size()) {
    throw Error(ErrorCode::kDimension, "parameter snapshot size mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].var.node().value = values[i];
  }
}

}  // namespace fgresq
