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

#include "fgresq/losses.h"

#include <algorithm>
#include <cmath>

#include "fgresq/error.h"

namespace fgresq {
namespace {

double StableSigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Row-wise cross-entropy with labels 0..n-1 on the diagonal.
double DiagonalCrossEntropy(const ad::Matrix& logits) {
  const Eigen::Index n = logits.rows();
  double loss = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double m = logits.row(r).maxCoeff();
    const double z = (logits.row(r).array() - m).exp().sum();
    loss += -(logits(r, r) - m - std::log(z));
  }
  return loss / static_cast<double>(n);
}

void CheckContrastiveShapes(Eigen::Index ni, Eigen::Index di, Eigen::Index nt,
                            Eigen::Index dt) {
  if (ni != nt || di != dt) {
    throw Error(ErrorCode::kDimension,
                "contrastive loss: image and text features differ in shape");
  }
  if (ni < 2) {
    throw Error(ErrorCode::kDegenerateBatch,
                "contrastive loss needs a batch of at least 2");
  }
}

void CheckSameLength(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimension, std::string(what) + ": length mismatch");
  }
}

}  // namespace

double ContrastiveAlignmentLoss(const ad::Matrix& image_features,
                                const ad::Matrix& text_features,
                                double scale) {
  CheckContrastiveShapes(image_features.rows(), image_features.cols(),
                         text_features.rows(), text_features.cols());
  const Eigen::Index n = image_features.rows();
  // Explicit dot products in a fixed order keep the loss exactly symmetric
  // under swapping the two arguments.
  ad::Matrix it(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double dot = 0.0;
      for (Eigen::Index k = 0; k < image_features.cols(); ++k) {
        dot += image_features(i, k) * text_features(j, k);
      }
      it(i, j) = scale * dot;
    }
  }
  const ad::Matrix ti = it.transpose();
  return 0.5 * (DiagonalCrossEntropy(it) + DiagonalCrossEntropy(ti));
}

ad::Var ContrastiveAlignmentLoss(ad::Tape& t, const ad::Var& image_features,
                                 const ad::Var& text_features,
                                 const ad::Var& scale) {
  CheckContrastiveShapes(image_features.rows(), image_features.cols(),
                         text_features.rows(), text_features.cols());
  const ad::Var logits = ad::MulScalar(
      t, ad::MatMul(t, image_features, ad::Transpose(t, text_features)), scale);
  std::vector<Eigen::Index> labels(static_cast<std::size_t>(logits.rows()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<Eigen::Index>(i);
  }
  const ad::Var forward = ad::CrossEntropyRows(t, logits, labels);
  const ad::Var backward =
      ad::CrossEntropyRows(t, ad::Transpose(t, logits), labels);
  return ad::Scale(t, ad::Add(t, forward, backward), 0.5);
}

double FidelityPairTerm(double p, double g, double eps) {
  return 1.0 - std::sqrt(p * g + eps) - std::sqrt((1.0 - p) * (1.0 - g) + eps);
}

double FidelityTarget(double gt_a, double gt_b) {
  const double d = gt_a - gt_b;
  const double sign = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
  return 0.5 * (sign + 1.0);
}

double FidelityLossScene(std::span<const double> pred,
                         std::span<const double> gt, double eps) {
  CheckSameLength(pred.size(), gt.size(), "fidelity loss");
  const std::size_t n = pred.size();
  if (n < 2) {
    throw Error(ErrorCode::kDegenerateScene,
                "fidelity loss needs at least 2 samples in a scene");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      total += FidelityPairTerm(StableSigmoid(pred[i] - pred[j]),
                                FidelityTarget(gt[i], gt[j]), eps);
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

ad::Var FidelityLossScene(ad::Tape& t, const ad::Var& pred,
                          std::span<const double> gt, double eps) {
  if (pred.cols() != 1) {
    throw Error(ErrorCode::kDimension, "fidelity loss expects an n x 1 column");
  }
  const Eigen::VectorXd y = pred.value().col(0);
  const double value =
      FidelityLossScene(std::span<const double>(y.data(), y.size()), gt, eps);
  std::vector<double> targets(gt.begin(), gt.end());
  std::array<ad::Var, 1> in = {pred};
  return t.Emit(ad::Matrix::Constant(1, 1, value), in,
                [pred, targets, eps](const ad::Matrix& g) {
                  const Eigen::Index n = pred.rows();
                  const double norm =
                      static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
                  ad::Matrix gin = ad::Matrix::Zero(n, 1);
                  for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index j = i + 1; j < n; ++j) {
                      const double p =
                          StableSigmoid(pred.value()(i, 0) - pred.value()(j, 0));
                      const double gij = FidelityTarget(targets[i], targets[j]);
                      const double dterm_dp =
                          -gij / (2.0 * std::sqrt(p * gij + eps)) +
                          (1.0 - gij) /
                              (2.0 * std::sqrt((1.0 - p) * (1.0 - gij) + eps));
                      const double d = dterm_dp * p * (1.0 - p) / norm;
                      gin(i, 0) += d;
                      gin(j, 0) -= d;
                    }
                  }
                  pred.node().Accumulate(gin * g(0, 0));
                });
}

std::vector<double> InverseCountWeights(std::span<const std::int64_t> counts) {
  std::vector<double> w(counts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 0) {
      throw Error(ErrorCode::kDegenerateScene, "scene sample count must be > 0");
    }
    w[i] = 1.0 / static_cast<double>(counts[i]);
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

double SceneLoss(const std::map<std::string, double>& per_scene_losses,
                 const std::map<std::string, std::int64_t>& counts) {
  if (per_scene_losses.size() != counts.size()) {
    throw Error(ErrorCode::kKeyMismatch, "scene loss: key sets differ");
  }
  std::vector<std::int64_t> n;
  std::vector<double> losses;
  for (const auto& [scene, loss] : per_scene_losses) {
    auto it = counts.find(scene);
    if (it == counts.end()) {
      throw Error(ErrorCode::kKeyMismatch,
                  "scene loss: no sample count for '" + scene + "'");
    }
    if (it->second < 2) {
      throw Error(ErrorCode::kDegenerateScene,
                  "scene '" + scene + "' has fewer than 2 samples");
    }
    n.push_back(it->second);
    losses.push_back(loss);
  }
  const auto w = InverseCountWeights(n);
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] * losses[i];
  return total;
}

double RankingLoss(std::span<const double> p, std::span<const double> r) {
  CheckSameLength(p.size(), r.size(), "ranking loss");
  if (p.empty()) {
    throw Error(ErrorCode::kDegenerateBatch, "ranking loss over zero pairs");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbabilityClip, 1.0 - kProbabilityClip);
    total += r[i] * std::log(q) + (1.0 - r[i]) * std::log(1.0 - q);
  }
  return -total / static_cast<double>(p.size());
}

double RankingLossFromLogits(std::span<const double> logits,
                             std::span<const double> r) {
  CheckSameLength(logits.size(), r.size(), "ranking loss");
  if (logits.empty()) {
    throw Error(ErrorCode::kDegenerateBatch, "ranking loss over zero pairs");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    total += r[i] * Softplus(-logits[i]) + (1.0 - r[i]) * Softplus(logits[i]);
  }
  return total / static_cast<double>(logits.size());
}

ad::Var RankingLossFromLogits(ad::Tape& t, const ad::Var& logits,
                              std::span<const double> r) {
  if (logits.cols() != 1) {
    throw Error(ErrorCode::kDimension, "ranking loss expects an m x 1 column");
  }
  const Eigen::VectorXd z = logits.value().col(0);
  const double value =
      RankingLossFromLogits(std::span<const double>(z.data(), z.size()), r);
  std::vector<double> targets(r.begin(), r.end());
  std::array<ad::Var, 1> in = {logits};
  return t.Emit(ad::Matrix::Constant(1, 1, value), in,
                [logits, targets](const ad::Matrix& g) {
                  const Eigen::Index m = logits.rows();
                  ad::Matrix gin(m, 1);
                  for (Eigen::Index i = 0; i < m; ++i) {
                    gin(i, 0) = (StableSigmoid(logits.value()(i, 0)) - targets[i]) /
                                static_cast<double>(m);
                  }
                  logits.node().Accumulate(gin * g(0, 0));
                });
}

double TotalLoss(double scene_component, double rank_component, double lambda1,
                 double lambda2) {
  return lambda1 * scene_component + lambda2 * rank_component;
}

}  // namespace fgresq
