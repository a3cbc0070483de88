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

// Pairwise annotation campaign: two annotator groups, round-1 voting, optional
// re-vote, expert review of disagreements, and export of final labels.
//
// State is an append-only JSONL log, one record per line:
//   {"kind":"preference","pair_id":..,"annotator_id":..,"choice":"A","round":1,"timestamp":..}
//   {"kind":"resolution","pair_id":..,"expert_id":..,"final_choice":"B","rationale":..,"timestamp":..}
// Each record is flushed and fsync'ed before the call returns; the log is
// replayed on construction.

#ifndef FGRESQ_ANNOTATION_H_
#define FGRESQ_ANNOTATION_H_

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fgresq/data_model.h"

namespace fgresq {

enum class AnnotatorRole { kAnnotator, kExpert };

std::string_view ToString(AnnotatorRole role);
AnnotatorRole ParseAnnotatorRole(std::string_view name);

struct AnnotatorProfile {
  std::string annotator_id;
  int group = 0;  // 1 or 2 for annotators, 0 for experts
  AnnotatorRole role = AnnotatorRole::kAnnotator;
  std::string token;
};

// JSON array of {"annotator_id","group","role","token"}.
std::vector<AnnotatorProfile> LoadAnnotators(const std::string& path);
std::vector<AnnotatorProfile> AnnotatorsFromJson(std::string_view json);

struct PreferenceRecord {
  std::string pair_id;
  std::string annotator_id;
  Preference choice = Preference::kEqual;
  int round = 1;
  std::int64_t timestamp = 0;

  bool operator==(const PreferenceRecord&) const = default;
};

struct ResolutionRecord {
  std::string pair_id;
  std::string expert_id;
  Preference final_choice = Preference::kEqual;
  std::string rationale;
  std::int64_t timestamp = 0;

  bool operator==(const ResolutionRecord&) const = default;
};

struct Assignment {
  std::map<std::string, int> group_of_pair;
  std::map<std::string, std::vector<std::string>> pairs_of_annotator;
};

// Shuffles the sorted pair ids under `seed`; the first ceil(n/2) go to group
// 1, the rest to group 2. Every pair is assigned to every annotator of its
// group. Throws Error(kInvalidArgument) when a group has no annotator.
Assignment AssignPairs(std::vector<std::string> pair_ids,
                       const std::vector<AnnotatorProfile>& annotators,
                       std::uint64_t seed);

enum class AgreementStatus { kUnanimous, kDisagreed, kIncomplete, kMajority };

std::string_view ToString(AgreementStatus status);

struct PairAnnotationState {
  std::string pair_id;
  AgreementStatus status = AgreementStatus::kIncomplete;
  int round = 1;  // round the status was derived from
  std::map<Preference, int> votes;
  int submitted = 0;
  int assigned = 0;
  std::optional<Preference> final_label;
  bool resolved = false;
};

struct AnnotationConfig {
  std::string log_path;
  std::uint64_t seed = 0;
  // Round-1 disagreements are voted again by the same annotators before any
  // expert review.
  bool revote_round = false;
  // Complete pairs with a strict majority are labelled without review.
  bool majority_mode = false;
};

using Clock = std::function<std::int64_t()>;
// Milliseconds since the Unix epoch.
std::int64_t SystemClockMillis();

struct NextPair {
  std::string pair_id;
  int round = 1;
};

struct AnnotationExport {
  DatasetManifest manifest;
  std::vector<PreferenceRecord> preferences;
  std::vector<ResolutionRecord> resolutions;
  std::string dump;  // JSONL, preferences first, then resolutions
};

// Thread-safe; every public method takes the internal lock.
class AnnotationService {
 public:
  // The campaign covers the manifest's fine-grained pairs. Throws
  // Error(kInvalidArgument) for duplicate annotator ids or tokens.
  AnnotationService(DatasetManifest manifest, std::vector<AnnotatorProfile> annotators,
                    AnnotationConfig config, Clock clock = SystemClockMillis);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  const DatasetManifest& manifest() const { return manifest_; }
  const Assignment& assignment() const { return assignment_; }

  // nullptr for an unknown token.
  const AnnotatorProfile* Authenticate(std::string_view token) const;
  const AnnotatorProfile& Annotator(std::string_view annotator_id) const;

  std::vector<std::string> AssignedPairs(std::string_view annotator_id) const;
  // Experts get the next unresolved disagreed pair.
  std::optional<NextPair> Next(std::string_view annotator_id) const;
  std::int64_t CompletedCount(std::string_view annotator_id) const;

  // Errors: kNotFound (pair), kAuthorization (not assigned), kInvalidState
  // (round 2 not open for this pair), kConflict (record exists),
  // kInvalidArgument.
  PreferenceRecord Submit(std::string_view annotator_id, std::string_view pair_id,
                          Preference choice, int round = 1);

  PairAnnotationState Status(std::string_view pair_id) const;

  // Errors: kAuthorization (not an expert), kInvalidState (pair not
  // disagreed), kConflict (already resolved), kNotFound.
  ResolutionRecord Resolve(std::string_view expert_id, std::string_view pair_id,
                           Preference final_choice, std::string rationale = "");

  std::vector<PreferenceRecord> PreferencesForPair(std::string_view pair_id) const;
  std::vector<PreferenceRecord> PreferencesByAnnotator(std::string_view annotator_id) const;

  AnnotationExport Export() const;

 private:
  PairAnnotationState StatusLocked(const std::string& pair_id) const;
  void Append(const std::string& line);
  void Apply(const PreferenceRecord& record);
  void Apply(const ResolutionRecord& record);
  void Replay();

  DatasetManifest manifest_;
  std::vector<AnnotatorProfile> annotators_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::string, std::size_t> by_token_;
  AnnotationConfig config_;
  Clock clock_;
  Assignment assignment_;
  std::set<std::string> campaign_pairs_;

  mutable std::mutex mu_;
  int log_fd_ = -1;
  std::vector<PreferenceRecord> preferences_;
  std::vector<ResolutionRecord> resolutions_;
  // (pair, annotator, round) -> index into preferences_
  std::map<std::tuple<std::string, std::string, int>, std::size_t> index_;
  std::map<std::string, std::size_t> resolution_of_pair_;
};

std::string PreferenceRecordToJson(const PreferenceRecord& record);
std::string ResolutionRecordToJson(const ResolutionRecord& record);

}  // namespace fgresq

#endif  // FGRESQ_ANNOTATION_H_
