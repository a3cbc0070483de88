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

#include "fgresq/annotation.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fgresq/error.h"
#include "fgresq/random.h"

namespace fgresq {

using nlohmann::json;

std::string_view ToString(AnnotatorRole role) {
  return role == AnnotatorRole::kExpert ? "expert" : "annotator";
}

AnnotatorRole ParseAnnotatorRole(std::string_view name) {
  if (name == "expert") return AnnotatorRole::kExpert;
  if (name == "annotator") return AnnotatorRole::kAnnotator;
  throw Error(ErrorCode::kInvalidArgument, "unknown role '" + std::string(name) + "'");
}

std::string_view ToString(AgreementStatus status) {
  switch (status) {
    case AgreementStatus::kUnanimous: return "unanimous";
    case AgreementStatus::kDisagreed: return "disagreed";
    case AgreementStatus::kIncomplete: return "incomplete";
    case AgreementStatus::kMajority: return "majority";
  }
  return "incomplete";
}

std::vector<AnnotatorProfile> AnnotatorsFromJson(std::string_view text) {
  std::vector<AnnotatorProfile> out;
  try {
    const json list = json::parse(text);
    if (!list.is_array()) {
      throw Error(ErrorCode::kInvalidArgument, "annotator list must be a JSON array");
    }
    for (const json& j : list) {
      AnnotatorProfile p;
      p.annotator_id = j.at("annotator_id").get<std::string>();
      p.role = ParseAnnotatorRole(j.value("role", "annotator"));
      p.group = j.value("group", 0);
      p.token = j.at("token").get<std::string>();
      if (p.role == AnnotatorRole::kAnnotator && p.group != 1 && p.group != 2) {
        throw Error(ErrorCode::kInvalidArgument,
                    "annotator '" + p.annotator_id + "' must be in group 1 or 2");
      }
      if (p.role == AnnotatorRole::kExpert) p.group = 0;
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed annotator list: ") + e.what());
  }
  return out;
}

std::vector<AnnotatorProfile> LoadAnnotators(const std::string& path) {
  return AnnotatorsFromJson(ReadFile(path));
}

Assignment AssignPairs(std::vector<std::string> pair_ids,
                       const std::vector<AnnotatorProfile>& annotators,
                       std::uint64_t seed) {
  std::vector<std::string> members[2];
  for (const auto& a : annotators) {
    if (a.role == AnnotatorRole::kAnnotator) members[a.group - 1].push_back(a.annotator_id);
  }
  if (members[0].empty() || members[1].empty()) {
    throw Error(ErrorCode::kInvalidArgument, "each annotator group needs at least one member");
  }
  std::sort(pair_ids.begin(), pair_ids.end());
  Rng rng(seed);
  rng.shuffle(std::span(pair_ids));
  Assignment out;
  const std::size_t first = (pair_ids.size() + 1) / 2;
  for (std::size_t i = 0; i < pair_ids.size(); ++i) {
    const int g = i < first ? 1 : 2;
    out.group_of_pair[pair_ids[i]] = g;
  }
  for (int g = 0; g < 2; ++g) {
    for (const auto& id : members[g]) out.pairs_of_annotator[id];
  }
  for (const auto& [pair, g] : out.group_of_pair) {
    for (const auto& id : members[g - 1]) out.pairs_of_annotator[id].push_back(pair);
  }
  return out;
}

std::int64_t SystemClockMillis() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string PreferenceRecordToJson(const PreferenceRecord& r) {
  return json{{"kind", "preference"},     {"pair_id", r.pair_id},
              {"annotator_id", r.annotator_id}, {"choice", ToString(r.choice)},
              {"round", r.round},         {"timestamp", r.timestamp}}
      .dump();
}

std::string ResolutionRecordToJson(const ResolutionRecord& r) {
  return json{{"kind", "resolution"},   {"pair_id", r.pair_id},
              {"expert_id", r.expert_id}, {"final_choice", ToString(r.final_choice)},
              {"rationale", r.rationale}, {"timestamp", r.timestamp}}
      .dump();
}

namespace {

Preference ParseChoice(std::string_view name) {
  const Preference p = ParsePreference(name);
  if (p == Preference::kUnlabeled) {
    throw Error(ErrorCode::kInvalidArgument, "choice must be A, B or equal");
  }
  return p;
}

struct RoundTally {
  std::map<Preference, int> votes;
  int submitted = 0;
};

}  // namespace

AnnotationService::AnnotationService(DatasetManifest manifest,
                                     std::vector<AnnotatorProfile> annotators,
                                     AnnotationConfig config, Clock clock)
    : manifest_(std::move(manifest)),
      annotators_(std::move(annotators)),
      config_(std::move(config)),
      clock_(std::move(clock)) {
  for (std::size_t i = 0; i < annotators_.size(); ++i) {
    const auto& a = annotators_[i];
    if (!by_id_.emplace(a.annotator_id, i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate annotator '" + a.annotator_id + "'");
    }
    if (a.token.empty() || !by_token_.emplace(a.token, i).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "missing or duplicate token for '" + a.annotator_id + "'");
    }
  }
  std::vector<std::string> ids;
  for (const auto& p : manifest_.pairs) {
    if (p.status == PairStatus::kFineGrained) ids.push_back(p.pair_id);
  }
  campaign_pairs_.insert(ids.begin(), ids.end());
  assignment_ = AssignPairs(ids, annotators_, config_.seed);
  if (!config_.log_path.empty()) {
    Replay();
    const auto parent = std::filesystem::path(config_.log_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    log_fd_ = ::open(config_.log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (log_fd_ < 0) {
      throw Error(ErrorCode::kIo, "cannot open annotation log '" + config_.log_path +
                                      "': " + std::strerror(errno));
    }
  }
}

AnnotationService::~AnnotationService() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void AnnotationService::Replay() {
  std::string text;
  if (!std::filesystem::exists(config_.log_path)) return;
  text = ReadFile(config_.log_path);
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    ++line_no;
    // A final line without a newline was never acknowledged.
    if (nl == std::string::npos) break;
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "preference") {
        Apply(PreferenceRecord{j.at("pair_id").get<std::string>(),
                               j.at("annotator_id").get<std::string>(),
                               ParseChoice(j.at("choice").get<std::string>()),
                               j.at("round").get<int>(), j.at("timestamp").get<std::int64_t>()});
      } else if (kind == "resolution") {
        Apply(ResolutionRecord{j.at("pair_id").get<std::string>(),
                               j.at("expert_id").get<std::string>(),
                               ParseChoice(j.at("final_choice").get<std::string>()),
                               j.value("rationale", ""), j.at("timestamp").get<std::int64_t>()});
      } else {
        throw Error(ErrorCode::kIo, "unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIo, config_.log_path + ":" + std::to_string(line_no) +
                                      ": malformed record: " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kIo,
                  config_.log_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void AnnotationService::Apply(const PreferenceRecord& r) {
  auto key = std::make_tuple(r.pair_id, r.annotator_id, r.round);
  if (index_.count(key)) {
    throw Error(ErrorCode::kConflict, "duplicate preference for " + r.pair_id);
  }
  index_[key] = preferences_.size();
  preferences_.push_back(r);
}

void AnnotationService::Apply(const ResolutionRecord& r) {
  if (resolution_of_pair_.count(r.pair_id)) {
    throw Error(ErrorCode::kConflict, "duplicate resolution for " + r.pair_id);
  }
  resolution_of_pair_[r.pair_id] = resolutions_.size();
  resolutions_.push_back(r);
}

void AnnotationService::Append(const std::string& line) {
  if (log_fd_ < 0) return;
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(log_fd_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, std::string("annotation log write failed: ") +
                                      std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(log_fd_) != 0) {
    throw Error(ErrorCode::kIo, std::string("annotation log fsync failed: ") +
                                    std::strerror(errno));
  }
}

const AnnotatorProfile* AnnotationService::Authenticate(std::string_view token) const {
  auto it = by_token_.find(std::string(token));
  return it == by_token_.end() ? nullptr : &annotators_[it->second];
}

const AnnotatorProfile& AnnotationService::Annotator(std::string_view annotator_id) const {
  auto it = by_id_.find(std::string(annotator_id));
  if (it == by_id_.end()) {
    throw Error(ErrorCode::kAuthorization, "unknown annotator '" + std::string(annotator_id) + "'");
  }
  return annotators_[it->second];
}

std::vector<std::string> AnnotationService::AssignedPairs(std::string_view annotator_id) const {
  auto it = assignment_.pairs_of_annotator.find(std::string(annotator_id));
  return it == assignment_.pairs_of_annotator.end() ? std::vector<std::string>{}
                                                    : it->second;
}

PairAnnotationState AnnotationService::StatusLocked(const std::string& pair_id) const {
  if (!campaign_pairs_.count(pair_id)) {
    throw Error(ErrorCode::kNotFound, "pair '" + pair_id + "' is not in the campaign");
  }
  PairAnnotationState st;
  st.pair_id = pair_id;
  const int group = assignment_.group_of_pair.at(pair_id);
  std::vector<std::string> members;
  for (const auto& a : annotators_) {
    if (a.role == AnnotatorRole::kAnnotator && a.group == group) members.push_back(a.annotator_id);
  }
  st.assigned = static_cast<int>(members.size());
  auto tally = [&](int round) {
    RoundTally t;
    for (const auto& m : members) {
      auto it = index_.find(std::make_tuple(pair_id, m, round));
      if (it == index_.end()) continue;
      ++t.votes[preferences_[it->second].choice];
      ++t.submitted;
    }
    return t;
  };
  // Status of one round on its own.
  auto judge = [&](const RoundTally& t, std::optional<Preference>& label) {
    const bool complete = t.submitted == st.assigned && st.assigned > 0;
    if (t.votes.size() == 1 && complete) {
      label = t.votes.begin()->first;
      return AgreementStatus::kUnanimous;
    }
    if (t.votes.size() < 2) return AgreementStatus::kIncomplete;
    if (config_.majority_mode) {
      if (!complete) return AgreementStatus::kIncomplete;
      for (const auto& [choice, n] : t.votes) {
        if (2 * n > st.assigned) {
          label = choice;
          return AgreementStatus::kMajority;
        }
      }
    }
    return AgreementStatus::kDisagreed;
  };

  const RoundTally r1 = tally(1);
  std::optional<Preference> label;
  st.status = judge(r1, label);
  st.votes = r1.votes;
  st.submitted = r1.submitted;
  if (config_.revote_round && st.status == AgreementStatus::kDisagreed) {
    if (r1.submitted < st.assigned) {
      st.status = AgreementStatus::kIncomplete;
    } else {
      const RoundTally r2 = tally(2);
      st.round = 2;
      st.votes = r2.votes;
      st.submitted = r2.submitted;
      st.status = judge(r2, label);
    }
  }
  st.final_label = label;
  auto res = resolution_of_pair_.find(pair_id);
  if (res != resolution_of_pair_.end()) {
    st.resolved = true;
    st.final_label = resolutions_[res->second].final_choice;
  }
  return st;
}

PairAnnotationState AnnotationService::Status(std::string_view pair_id) const {
  std::lock_guard lock(mu_);
  return StatusLocked(std::string(pair_id));
}

std::optional<NextPair> AnnotationService::Next(std::string_view annotator_id) const {
  std::lock_guard lock(mu_);
  const AnnotatorProfile& who = Annotator(annotator_id);
  if (who.role == AnnotatorRole::kExpert) {
    for (const auto& id : campaign_pairs_) {
      const auto st = StatusLocked(id);
      if (st.status == AgreementStatus::kDisagreed && !st.resolved) return NextPair{id, 0};
    }
    return std::nullopt;
  }
  const auto& mine = AssignedPairs(annotator_id);
  for (const auto& id : mine) {
    if (!index_.count(std::make_tuple(id, who.annotator_id, 1))) return NextPair{id, 1};
  }
  if (config_.revote_round) {
    for (const auto& id : mine) {
      const auto st = StatusLocked(id);
      if (st.round == 2 && !st.resolved &&
          !index_.count(std::make_tuple(id, who.annotator_id, 2))) {
        return NextPair{id, 2};
      }
    }
  }
  return std::nullopt;
}

std::int64_t AnnotationService::CompletedCount(std::string_view annotator_id) const {
  std::lock_guard lock(mu_);
  return std::count_if(preferences_.begin(), preferences_.end(),
                       [&](const PreferenceRecord& r) { return r.annotator_id == annotator_id; });
}

PreferenceRecord AnnotationService::Submit(std::string_view annotator_id,
                                           std::string_view pair_id, Preference choice,
                                           int round) {
  if (choice == Preference::kUnlabeled) {
    throw Error(ErrorCode::kInvalidArgument, "choice must be A, B or equal");
  }
  if (round != 1 && round != 2) {
    throw Error(ErrorCode::kInvalidArgument, "round must be 1 or 2");
  }
  std::lock_guard lock(mu_);
  const std::string pid(pair_id);
  if (!campaign_pairs_.count(pid)) {
    throw Error(ErrorCode::kNotFound, "pair '" + pid + "' is not in the campaign");
  }
  const AnnotatorProfile& who = Annotator(annotator_id);
  const auto& mine = AssignedPairs(annotator_id);
  if (who.role != AnnotatorRole::kAnnotator ||
      !std::binary_search(mine.begin(), mine.end(), pid)) {
    throw Error(ErrorCode::kAuthorization,
                "pair '" + pid + "' is not assigned to '" + who.annotator_id + "'");
  }
  if (index_.count(std::make_tuple(pid, who.annotator_id, round))) {
    throw Error(ErrorCode::kConflict, "'" + who.annotator_id + "' already voted on '" + pid +
                                          "' in round " + std::to_string(round));
  }
  if (round == 2) {
    const auto st = StatusLocked(pid);
    if (!config_.revote_round || st.round != 2 || st.resolved) {
      throw Error(ErrorCode::kInvalidState, "round 2 is not open for '" + pid + "'");
    }
  }
  PreferenceRecord r{pid, who.annotator_id, choice, round, clock_()};
  Append(PreferenceRecordToJson(r));
  Apply(r);
  return r;
}

ResolutionRecord AnnotationService::Resolve(std::string_view expert_id,
                                            std::string_view pair_id,
                                            Preference final_choice, std::string rationale) {
  if (final_choice == Preference::kUnlabeled) {
    throw Error(ErrorCode::kInvalidArgument, "final choice must be A, B or equal");
  }
  std::lock_guard lock(mu_);
  const AnnotatorProfile& who = Annotator(expert_id);
  if (who.role != AnnotatorRole::kExpert) {
    throw Error(ErrorCode::kAuthorization, "'" + who.annotator_id + "' is not an expert");
  }
  const std::string pid(pair_id);
  const auto st = StatusLocked(pid);
  if (st.resolved) throw Error(ErrorCode::kConflict, "pair '" + pid + "' is already resolved");
  if (st.status != AgreementStatus::kDisagreed) {
    throw Error(ErrorCode::kInvalidState, "pair '" + pid + "' is " +
                                              std::string(ToString(st.status)) +
                                              ", not disagreed");
  }
  ResolutionRecord r{pid, who.annotator_id, final_choice, std::move(rationale), clock_()};
  Append(ResolutionRecordToJson(r));
  Apply(r);
  return r;
}

std::vector<PreferenceRecord> AnnotationService::PreferencesForPair(
    std::string_view pair_id) const {
  std::lock_guard lock(mu_);
  std::vector<PreferenceRecord> out;
  for (const auto& r : preferences_) {
    if (r.pair_id == pair_id) out.push_back(r);
  }
  return out;
}

std::vector<PreferenceRecord> AnnotationService::PreferencesByAnnotator(
    std::string_view annotator_id) const {
  std::lock_guard lock(mu_);
  std::vector<PreferenceRecord> out;
  for (const auto& r : preferences_) {
    if (r.annotator_id == annotator_id) out.push_back(r);
  }
  return out;
}

AnnotationExport AnnotationService::Export() const {
  std::lock_guard lock(mu_);
  AnnotationExport out;
  out.manifest = manifest_;
  out.preferences = preferences_;
  out.resolutions = resolutions_;
  for (auto& p : out.manifest.pairs) {
    if (!campaign_pairs_.count(p.pair_id)) continue;
    const auto st = StatusLocked(p.pair_id);
    if (st.final_label) p.preference = *st.final_label;
  }
  out.manifest.Rebuild();
  std::ostringstream os;
  for (const auto& r : preferences_) os << PreferenceRecordToJson(r) << '\n';
  for (const auto& r : resolutions_) os << ResolutionRecordToJson(r) << '\n';
  out.dump = os.str();
  return out;
}

}  // namespace fgresq
