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

#ifndef FGRESQ_ERROR_H_
#define FGRESQ_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fgresq {

// Every failure raised by the library carries one of these codes so callers
// (the CLI, the HTTP front end) can map it without string matching.
enum class ErrorCode {
  kMalformedManifest,
  kIntegrity,
  kEmptyScene,
  kEmptyDataset,
  kUnscoredPair,
  kEmptyImage,
  kDimension,
  kIo,
  kInvalidArgument,
  kDegenerateBatch,
  kDegenerateScene,
  kKeyMismatch,
  kConflict,
  kAuthorization,
  kInvalidState,
  kNotFound,
  kIncomparableReports,
  kDivergence,
  kMalformedCheckpoint,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedManifest: return "malformed-manifest";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kEmptyScene: return "empty-scene";
    case ErrorCode::kEmptyDataset: return "empty-dataset";
    case ErrorCode::kUnscoredPair: return "unscored-pair";
    case ErrorCode::kEmptyImage: return "empty-image";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegenerateBatch: return "degenerate-batch";
    case ErrorCode::kDegenerateScene: return "degenerate-scene";
    case ErrorCode::kKeyMismatch: return "key-mismatch";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kAuthorization: return "authorization";
    case ErrorCode::kInvalidState: return "invalid-state";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kIncomparableReports: return "incomparable-reports";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kMalformedCheckpoint: return "malformed-checkpoint";
  }
  return "unknown";
}

}  // namespace fgresq

#endif  // FGRESQ_ERROR_H_
