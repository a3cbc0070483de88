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

#ifndef FGRESQ_TEXT_ANCHORS_H_
#define FGRESQ_TEXT_ANCHORS_H_

#include <string>
#include <string_view>

#include "fgresq/autodiff.h"
#include "fgresq/data_model.h"

namespace fgresq {

inline constexpr std::string_view kDefaultAnchorTemplate =
    "a photo restored from {task} degradation";

// Deterministic bag-of-tokens text encoder: each lower-cased word is hashed
// to a seed for a Gaussian vector, the vectors are summed and unit-normalized.
// It has no trainable state, so anchors never change during training.
Eigen::VectorXd EncodeText(std::string_view text, int dim);

// Replaces "{task}" with the task's name, underscores becoming spaces.
std::string RenderAnchorPrompt(std::string_view templ, Task task);

// One unit-norm anchor row per task, in kAllTasks order.
ad::Matrix BuildTextAnchors(int dim,
                            std::string_view templ = kDefaultAnchorTemplate);

}  // namespace fgresq

#endif  // FGRESQ_TEXT_ANCHORS_H_
