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

#include "fgresq/text_anchors.h"

#include <cctype>
#include <cstdint>

#include "fgresq/random.h"

namespace fgresq {
namespace {

std::uint64_t HashToken(std::string_view token) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Eigen::VectorXd EncodeText(std::string_view text, int dim) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    Rng rng(HashToken(token));
    for (int i = 0; i < dim; ++i) v[i] += rng.normal();
    token.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-') {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  const double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

std::string RenderAnchorPrompt(std::string_view templ, Task task) {
  std::string name(ToString(task));
  for (char& c : name) {
    if (c == '_') c = ' ';
  }
  std::string out(templ);
  const std::string key = "{task}";
  for (auto pos = out.find(key); pos != std::string::npos;
       pos = out.find(key, pos + name.size())) {
    out.replace(pos, key.size(), name);
  }
  return out;
}

ad::Matrix BuildTextAnchors(int dim, std::string_view templ) {
  ad::Matrix anchors(kTaskCount, dim);
  for (int t = 0; t < kTaskCount; ++t) {
    anchors.row(t) = EncodeText(RenderAnchorPrompt(templ, kAllTasks[t]), dim);
  }
  return anchors;
}

}  // namespace fgresq
