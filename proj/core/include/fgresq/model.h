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

// The dual-branch quality model.
//
//   general encoder      image -> f_g (d)
//   degradation encoder  image -> f_d (d, unit norm), aligned to text anchors
//   prompt fusion        w = softmax(mixer_2(f_d)) over K prompts
//                        f_p = mixer_1(sum_k w_k prompt_k)
//                        f_q = [f_g, f_p, f_g + f_p]
//   regression head      f_q -> score
//   comparison head      delta(A, B) = (h(A, B) - h(B, A)) / 2,
//                        h(A, B) = mlp([f_qA, f_qB, f_qA - f_qB]),
//                        p_AB = sigmoid(delta)
//
// With dfl_enabled = false the degradation branch is never evaluated and
// f_p is the zero vector.
//
// Both encoders are patch encoders: non-overlapping patch_size x patch_size
// patches (a strided convolution), a GELU, mean pooling, then a projection.

#ifndef FGRESQ_MODEL_H_
#define FGRESQ_MODEL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fgresq/autodiff.h"
#include "fgresq/image.h"

namespace fgresq {

enum class BackboneScale { kToy, kPaper };

struct ModelConfig {
  int feature_dim = 64;
  int prompt_count = 8;
  BackboneScale backbone_scale = BackboneScale::kToy;
  bool dfl_enabled = true;
  int encoder_width = 128;
  int mixer_hidden = 64;
  int head_hidden = 64;
  int image_size = 64;
  int patch_size = 8;
  int channels = 3;
  double logit_scale_init = 1.0 / 0.07;
  std::string anchor_template = "a photo restored from {task} degradation";
  std::uint64_t seed = 0;

  static ModelConfig Toy();
  // ViT-B/16 geometry: 224 input, 16-pixel patches, 512-d features.
  static ModelConfig Paper();

  // Throws Error(kInvalidArgument) when d < 8, K < 1 or the geometry is off.
  void Validate() const;
  int patches_per_image() const {
    const int g = image_size / patch_size;
    return g * g;
  }
  int patch_dim() const { return patch_size * patch_size * channels; }

  bool operator==(const ModelConfig&) const = default;
};

struct NamedParameter {
  std::string name;
  ad::Var var;
  bool trainable = true;
};

class ParameterStore {
 public:
  ad::Var Add(const std::string& name, ad::Matrix init, bool trainable = true);
  const ad::Var& Get(const std::string& name) const;
  std::span<NamedParameter> all() { return params_; }
  std::span<const NamedParameter> all() const { return params_; }
  // Affects every parameter whose name starts with `prefix`.
  void SetTrainable(const std::string& prefix, bool trainable);
  void ZeroGrad();
  std::size_t trainable_count() const;

 private:
  std::vector<NamedParameter> params_;
  std::map<std::string, std::size_t> index_;
};

struct Linear {
  ad::Var weight;  // in x out
  ad::Var bias;    // 1 x out
  ad::Var Forward(ad::Tape& t, const ad::Var& x) const;
};

struct Mlp {
  Linear hidden;
  Linear output;
  ad::Var Forward(ad::Tape& t, const ad::Var& x) const;
};

struct QualityFeatures {
  Eigen::VectorXd f_g;
  Eigen::VectorXd f_d;
  Eigen::VectorXd f_p;
  Eigen::VectorXd f_q;
  Eigen::VectorXd prompt_weights;
};

// Tape-level outputs of the fusion step for a batch of n images (one row each).
struct FusedBatch {
  ad::Var f_g;
  ad::Var f_d;  // empty when dfl is disabled
  ad::Var weights;
  ad::Var f_p;
  ad::Var f_q;
};

class FgresqModel {
 public:
  explicit FgresqModel(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  const ad::Matrix& text_anchors() const { return anchors_; }

  // Resizes to the model input and returns the normalized first `channels`
  // planes; grayscale input is replicated across channels.
  Image PrepareInput(const Image& image) const;

  // (n * patches_per_image) x patch_dim matrix; images must already be
  // image_size x image_size. Throws Error(kDimension) otherwise.
  ad::Matrix Patchify(std::span<const Image> images) const;

  ad::Var EncodeGeneral(ad::Tape& t, const ad::Matrix& patches) const;
  // Unit-normalized rows.
  ad::Var EncodeDegradation(ad::Tape& t, const ad::Matrix& patches) const;
  // exp(log_scale), the logit scale of the alignment loss.
  ad::Var LogitScale(ad::Tape& t) const;

  // f_d may be empty when dfl is disabled.
  FusedBatch Fuse(ad::Tape& t, const ad::Var& f_g, const ad::Var& f_d) const;
  FusedBatch Forward(ad::Tape& t, const ad::Matrix& patches) const;

  ad::Var PredictScore(ad::Tape& t, const ad::Var& f_q) const;
  // Antisymmetric logit delta(A, B), one row per pair.
  ad::Var PreferenceLogit(ad::Tape& t, const ad::Var& f_q_a,
                          const ad::Var& f_q_b) const;
  ad::Var PredictPreference(ad::Tape& t, const ad::Var& f_q_a,
                            const ad::Var& f_q_b) const;

  // Inference helpers (no gradients; safe to call concurrently).
  std::vector<QualityFeatures> Features(std::span<const Image> images) const;
  QualityFeatures Fuse(const Eigen::VectorXd& f_g,
                       const Eigen::VectorXd& f_d) const;
  Eigen::VectorXd EncodeDegradation(const Image& image) const;
  double PredictScore(const QualityFeatures& features) const;
  double PredictPreference(const QualityFeatures& a,
                           const QualityFeatures& b) const;
  // Index into kAllTasks of the anchor closest to f_d (cosine).
  int NearestAnchor(const Eigen::VectorXd& f_d) const;

  // Freezes or unfreezes the degradation encoder parameters.
  void SetDegradationTrainable(bool trainable);

 private:
  ModelConfig config_;
  ParameterStore params_;
  ad::Matrix anchors_;

  struct PatchEncoder {
    Linear embed;
    Linear project;
  };
  PatchEncoder general_;
  PatchEncoder degradation_;
  ad::Var prompts_;
  Mlp mixer_1_;
  Mlp mixer_2_;
  Mlp regression_;
  Mlp comparison_;
  ad::Var log_logit_scale_;

  ad::Var RunEncoder(ad::Tape& t, const PatchEncoder& enc,
                     const ad::Matrix& patches) const;
};

std::string ToString(BackboneScale scale);

// Flat JSON object; missing keys keep their defaults (the paper preset's
// when "backbone_scale" is "paper").
std::string ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(std::string_view json);
BackboneScale ParseBackboneScale(std::string_view name);

// Versioned JSON container: config echo, free-form metadata and every
// parameter tensor by name. Missing config fields (e.g. dfl_enabled in older
// files) fall back to ModelConfig defaults.
struct CheckpointMetadata {
  std::string checkpoint_id;
  std::int64_t epoch = 0;
  std::int64_t step = 0;
};

inline constexpr int kCheckpointVersion = 1;

std::string CheckpointToJson(const FgresqModel& model,
                             const CheckpointMetadata& metadata);
std::unique_ptr<FgresqModel> CheckpointFromJson(std::string_view json,
                                                CheckpointMetadata* metadata);
void SaveCheckpoint(const FgresqModel& model, const CheckpointMetadata& metadata,
                    const std::string& path);
std::unique_ptr<FgresqModel> LoadCheckpoint(const std::string& path,
                                            CheckpointMetadata* metadata = nullptr);

// Every parameter value, in store order, bit for bit.
std::vector<ad::Matrix> SnapshotParameters(const FgresqModel& model);
void RestoreParameters(FgresqModel& model, std::span<const ad::Matrix> values);

}  // namespace fgresq

#endif  // FGRESQ_MODEL_H_
