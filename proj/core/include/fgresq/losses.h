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

// Training objectives: the bidirectional contrastive alignment loss, the
// within-scene fidelity ranking loss, inverse-count scene weighting, the
// pairwise binary cross-entropy and their weighted sum.
//
// Each loss has a plain scalar form and a tape form for training. The tape
// forms compute values through the scalar functions, so both agree exactly.

#ifndef FGRESQ_LOSSES_H_
#define FGRESQ_LOSSES_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fgresq/autodiff.h"

namespace fgresq {

inline constexpr double kDefaultFidelityEpsilon = 1e-8;
inline constexpr double kProbabilityClip = 1e-12;

// 0.5 * [CE(scale * F_I F_T^T, y) + CE(scale * F_T F_I^T, y)] with y = 0..n-1.
// Rows are expected to be unit-normalized. Throws Error(kDegenerateBatch) for
// n < 2 and Error(kDimension) when shapes differ.
double ContrastiveAlignmentLoss(const ad::Matrix& image_features,
                                const ad::Matrix& text_features,
                                double scale = 1.0);

// Tape form; `scale` is a 1x1 node (typically exp of a learnable log-scale).
ad::Var ContrastiveAlignmentLoss(ad::Tape& t, const ad::Var& image_features,
                                 const ad::Var& text_features,
                                 const ad::Var& scale);

// 1 - sqrt(p g + eps) - sqrt((1 - p)(1 - g) + eps).
double FidelityPairTerm(double p, double g, double eps);

// g = (sign(a - b) + 1) / 2, so ties give 0.5.
double FidelityTarget(double gt_a, double gt_b);

// Mean pair term over all i < j, with p_ij = sigmoid(pred_i - pred_j).
// Throws Error(kDegenerateScene) for fewer than 2 samples.
double FidelityLossScene(std::span<const double> pred,
                         std::span<const double> gt,
                         double eps = kDefaultFidelityEpsilon);

// Tape form over an n x 1 prediction column.
ad::Var FidelityLossScene(ad::Tape& t, const ad::Var& pred,
                          std::span<const double> gt,
                          double eps = kDefaultFidelityEpsilon);

// w_s = (1 / N_s) / sum(1 / N_s'); always sums to 1.
std::vector<double> InverseCountWeights(std::span<const std::int64_t> counts);

// sum_s w_s L_s. Throws Error(kKeyMismatch) when the key sets differ and
// Error(kDegenerateScene) for counts below 2.
double SceneLoss(const std::map<std::string, double>& per_scene_losses,
                 const std::map<std::string, std::int64_t>& counts);

// -(1/M) sum [r ln p + (1 - r) ln(1 - p)], with p clipped to
// [kProbabilityClip, 1 - kProbabilityClip].
double RankingLoss(std::span<const double> p, std::span<const double> r);

// Same objective written on logits (p = sigmoid(logit)), numerically stable.
double RankingLossFromLogits(std::span<const double> logits,
                             std::span<const double> r);
ad::Var RankingLossFromLogits(ad::Tape& t, const ad::Var& logits,
                              std::span<const double> r);

double TotalLoss(double scene_component, double rank_component,
                 double lambda1, double lambda2);

}  // namespace fgresq

#endif  // FGRESQ_LOSSES_H_
