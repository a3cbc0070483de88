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

#include "fgresq/data_model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "fgresq/error.h"
#include "fgresq/random.h"

namespace fgresq {
namespace {

using nlohmann::json;

constexpr std::string_view kTaskNames[] = {
    "deblurring", "denoising",        "deraining",
    "dehazing",   "super_resolution", "mixture"};
constexpr std::string_view kTaskTitles[] = {
    "Deblurring", "Denoising", "Deraining", "Dehazing", "SR", "Mixture"};
constexpr std::string_view kStatusNames[] = {
    "candidate", "coarse_rejected", "unnoticeable_rejected", "fine_grained"};
constexpr std::string_view kPreferenceNames[] = {"A", "B", "equal",
                                                 "unlabeled"};

template <typename Enum, std::size_t N>
Enum ParseEnum(std::string_view name, const std::string_view (&names)[N],
               std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<Enum>(i);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown " + std::string(what) + " '" + std::string(name) + "'");
}

[[noreturn]] void Malformed(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kMalformedManifest,
              "manifest line " + std::to_string(line) + ": " + what);
}

[[noreturn]] void Integrity(const std::string& what) {
  throw Error(ErrorCode::kIntegrity, what);
}

std::string RequireString(const json& obj, const char* key, std::size_t line,
                          const std::string& record) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    Malformed(line, record + " is missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::optional<double> OptionalNumber(const json& obj, const char* key,
                                     std::size_t line,
                                     const std::string& record) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) {
    Malformed(line, record + " field '" + key + "' is not a number");
  }
  return it->get<double>();
}

json OptionalToJson(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

std::uint64_t Fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace

std::string_view ToString(Task task) {
  return kTaskNames[static_cast<int>(task)];
}
std::string_view ToString(PairStatus status) {
  return kStatusNames[static_cast<int>(status)];
}
std::string_view ToString(Preference preference) {
  return kPreferenceNames[static_cast<int>(preference)];
}
std::string_view TaskTitle(Task task) {
  return kTaskTitles[static_cast<int>(task)];
}
int TaskIndex(Task task) { return static_cast<int>(task); }

Task ParseTask(std::string_view name) {
  return ParseEnum<Task>(name, kTaskNames, "task");
}
PairStatus ParsePairStatus(std::string_view name) {
  return ParseEnum<PairStatus>(name, kStatusNames, "pair status");
}
Preference ParsePreference(std::string_view name) {
  return ParseEnum<Preference>(name, kPreferenceNames, "preference");
}

void DatasetManifest::Rebuild() {
  image_index_.clear();
  pair_index_.clear();
  scene_index_.clear();

  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const auto& s = scenes[i];
    if (!scene_index_.emplace(s.scene_id, i).second) {
      Integrity("duplicate scene '" + s.scene_id + "'");
    }
    if (!(s.tau_d > 0.0)) {
      Integrity("scene '" + s.scene_id + "' has non-positive tau_d");
    }
    if (s.sample_count < 0) {
      Integrity("scene '" + s.scene_id + "' has negative sample_count");
    }
  }

  struct GroupKey {
    std::string scene_id;
    Task task;
  };
  std::unordered_map<std::string, GroupKey> content_groups;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& img = images[i];
    if (!image_index_.emplace(img.image_id, i).second) {
      Integrity("duplicate image '" + img.image_id + "'");
    }
    if (!scene_index_.contains(img.scene_id)) {
      Integrity("image '" + img.image_id + "' references unknown scene '" +
                img.scene_id + "'");
    }
    if (img.mos_norm && !(*img.mos_norm >= 0.0 && *img.mos_norm <= 1.0)) {
      Integrity("image '" + img.image_id + "' has mos_norm outside [0,1]");
    }
    auto [it, inserted] =
        content_groups.emplace(img.content_id, GroupKey{img.scene_id, img.task});
    if (!inserted &&
        (it->second.scene_id != img.scene_id || it->second.task != img.task)) {
      Integrity("image '" + img.image_id + "' shares content_id '" +
                img.content_id + "' with an image of another scene or task");
    }
  }

  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!pair_index_.emplace(p.pair_id, i).second) {
      Integrity("duplicate pair '" + p.pair_id + "'");
    }
    if (p.image_a == p.image_b) {
      Integrity("pair '" + p.pair_id + "' pairs an image with itself");
    }
    const ImageRecord* a = FindImage(p.image_a);
    const ImageRecord* b = FindImage(p.image_b);
    if (a == nullptr || b == nullptr) {
      Integrity("pair '" + p.pair_id + "' references unknown image '" +
                (a == nullptr ? p.image_a : p.image_b) + "'");
    }
    if (a->content_id != b->content_id || a->task != b->task) {
      Integrity("pair '" + p.pair_id +
                "' members differ in content_id or task");
    }
    if (p.preference != Preference::kUnlabeled &&
        p.status != PairStatus::kFineGrained) {
      Integrity("pair '" + p.pair_id +
                "' carries a preference but is not fine_grained");
    }
    if (p.ssim_ab && !(*p.ssim_ab >= -1.0 && *p.ssim_ab <= 1.0)) {
      Integrity("pair '" + p.pair_id + "' has ssim_ab outside [-1,1]");
    }
  }
}

const ImageRecord* DatasetManifest::FindImage(std::string_view id) const {
  auto it = image_index_.find(std::string(id));
  return it == image_index_.end() ? nullptr : &images[it->second];
}
const PairRecord* DatasetManifest::FindPair(std::string_view id) const {
  auto it = pair_index_.find(std::string(id));
  return it == pair_index_.end() ? nullptr : &pairs[it->second];
}
const SceneDescriptor* DatasetManifest::FindScene(std::string_view id) const {
  auto it = scene_index_.find(std::string(id));
  return it == scene_index_.end() ? nullptr : &scenes[it->second];
}

const ImageRecord& DatasetManifest::Image(std::string_view id) const {
  if (const auto* r = FindImage(id)) return *r;
  throw Error(ErrorCode::kNotFound, "unknown image '" + std::string(id) + "'");
}
const PairRecord& DatasetManifest::Pair(std::string_view id) const {
  if (const auto* r = FindPair(id)) return *r;
  throw Error(ErrorCode::kNotFound, "unknown pair '" + std::string(id) + "'");
}
const SceneDescriptor& DatasetManifest::Scene(std::string_view id) const {
  if (const auto* r = FindScene(id)) return *r;
  throw Error(ErrorCode::kNotFound, "unknown scene '" + std::string(id) + "'");
}

Task DatasetManifest::PairTask(const PairRecord& pair) const {
  return Image(pair.image_a).task;
}

DatasetManifest ReadManifest(std::istream& in) {
  DatasetManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      Malformed(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) Malformed(line_no, "record is not an object");
    auto kind_it = obj.find("record");
    if (kind_it == obj.end() || !kind_it->is_string()) {
      Malformed(line_no, "record has no 'record' kind tag");
    }
    const std::string kind = kind_it->get<std::string>();
    try {
      if (kind == "image") {
        ImageRecord r;
        r.image_id = RequireString(obj, "image_id", line_no, "image");
        const std::string label = "image '" + r.image_id + "'";
        r.scene_id = RequireString(obj, "scene_id", line_no, label);
        r.content_id = RequireString(obj, "content_id", line_no, label);
        r.task = ParseTask(RequireString(obj, "task", line_no, label));
        r.mos_raw = OptionalNumber(obj, "mos_raw", line_no, label);
        r.mos_norm = OptionalNumber(obj, "mos_norm", line_no, label);
        r.path = obj.value("path", std::string());
        manifest.images.push_back(std::move(r));
      } else if (kind == "pair") {
        PairRecord r;
        r.pair_id = RequireString(obj, "pair_id", line_no, "pair");
        const std::string label = "pair '" + r.pair_id + "'";
        r.image_a = RequireString(obj, "image_a", line_no, label);
        r.image_b = RequireString(obj, "image_b", line_no, label);
        r.status = ParsePairStatus(obj.value("status", std::string("candidate")));
        r.preference =
            ParsePreference(obj.value("preference", std::string("unlabeled")));
        r.ssim_ab = OptionalNumber(obj, "ssim_ab", line_no, label);
        manifest.pairs.push_back(std::move(r));
      } else if (kind == "scene") {
        SceneDescriptor r;
        r.scene_id = RequireString(obj, "scene_id", line_no, "scene");
        const std::string label = "scene '" + r.scene_id + "'";
        r.tau_d = OptionalNumber(obj, "tau_d", line_no, label)
                      .value_or(kDefaultTauD);
        auto count = obj.find("sample_count");
        if (count != obj.end()) {
          if (!count->is_number_integer()) {
            Malformed(line_no, label + " sample_count is not an integer");
          }
          r.sample_count = count->get<std::int64_t>();
        }
        manifest.scenes.push_back(std::move(r));
      } else {
        Malformed(line_no, "unknown record kind '" + kind + "'");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMalformedManifest) throw;
      Malformed(line_no, e.what());
    } catch (const json::exception& e) {
      Malformed(line_no, e.what());
    }
  }
  manifest.Rebuild();
  return manifest;
}

void WriteManifest(const DatasetManifest& manifest, std::ostream& out) {
  for (const auto& s : manifest.scenes) {
    json obj = {{"record", "scene"},
                {"scene_id", s.scene_id},
                {"tau_d", s.tau_d},
                {"sample_count", s.sample_count}};
    out << obj.dump() << '\n';
  }
  for (const auto& r : manifest.images) {
    json obj = {{"record", "image"},
                {"image_id", r.image_id},
                {"scene_id", r.scene_id},
                {"content_id", r.content_id},
                {"task", ToString(r.task)},
                {"mos_raw", OptionalToJson(r.mos_raw)},
                {"mos_norm", OptionalToJson(r.mos_norm)},
                {"path", r.path}};
    out << obj.dump() << '\n';
  }
  for (const auto& p : manifest.pairs) {
    json obj = {{"record", "pair"},
                {"pair_id", p.pair_id},
                {"image_a", p.image_a},
                {"image_b", p.image_b},
                {"status", ToString(p.status)},
                {"preference", ToString(p.preference)},
                {"ssim_ab", OptionalToJson(p.ssim_ab)}};
    out << obj.dump() << '\n';
  }
}

DatasetManifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest '" + path + "'");
  return ReadManifest(in);
}

void SaveManifest(const DatasetManifest& manifest, const std::string& path) {
  std::ostringstream out;
  WriteManifest(manifest, out);
  WriteFile(path, out.str());
}

std::vector<double> NormalizeMos(std::span<const double> scores) {
  if (scores.empty()) {
    throw Error(ErrorCode::kEmptyScene, "cannot normalize an empty scene");
  }
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double range = *hi - *lo;
  std::vector<double> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = range > 0.0 ? (scores[i] - *lo) / range : 0.5;
  }
  return out;
}

DatasetManifest NormalizeManifestMos(const DatasetManifest& manifest) {
  DatasetManifest out = manifest;
  std::map<std::string, std::vector<std::size_t>> by_scene;
  for (std::size_t i = 0; i < out.images.size(); ++i) {
    if (out.images[i].mos_raw) by_scene[out.images[i].scene_id].push_back(i);
  }
  for (const auto& [scene, members] : by_scene) {
    std::vector<double> raw;
    raw.reserve(members.size());
    for (std::size_t i : members) raw.push_back(*out.images[i].mos_raw);
    const auto norm = NormalizeMos(raw);
    for (std::size_t k = 0; k < members.size(); ++k) {
      out.images[members[k]].mos_norm = norm[k];
    }
  }
  out.Rebuild();
  return out;
}

SplitSpec SplitByPairs(const DatasetManifest& manifest, double ratio,
                       std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "split ratio must be in (0,1)");
  }
  std::vector<std::vector<std::string>> per_task(kTaskCount);
  std::size_t total = 0;
  for (const auto& p : manifest.pairs) {
    if (p.status != PairStatus::kFineGrained) continue;
    per_task[TaskIndex(manifest.PairTask(p))].push_back(p.pair_id);
    ++total;
  }
  if (total == 0) {
    throw Error(ErrorCode::kEmptyDataset, "manifest has no fine_grained pairs");
  }

  // Largest-remainder apportionment of the global train count over tasks.
  const auto target = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(total)));
  std::vector<std::size_t> quota(kTaskCount);
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (int t = 0; t < kTaskCount; ++t) {
    const double exact = ratio * static_cast<double>(per_task[t].size());
    quota[t] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[t];
    if (!per_task[t].empty()) remainders.emplace_back(exact - quota[t], t);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < target && k < remainders.size(); ++k) {
    ++quota[remainders[k].second];
    ++assigned;
  }

  SplitSpec split;
  split.seed = seed;
  split.ratio = ratio;
  for (int t = 0; t < kTaskCount; ++t) {
    auto& ids = per_task[t];
    std::sort(ids.begin(), ids.end());
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(t)));
    rng.shuffle(std::span<std::string>(ids));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < quota[t] ? split.train_pair_ids : split.test_pair_ids)
          .push_back(ids[i]);
    }
  }
  std::sort(split.train_pair_ids.begin(), split.train_pair_ids.end());
  std::sort(split.test_pair_ids.begin(), split.test_pair_ids.end());
  return split;
}

std::size_t SplitImageLeakage(const DatasetManifest& manifest,
                              const SplitSpec& split) {
  std::set<std::string> train_images;
  for (const auto& id : split.train_pair_ids) {
    const auto& p = manifest.Pair(id);
    train_images.insert(p.image_a);
    train_images.insert(p.image_b);
  }
  std::set<std::string> leaked;
  for (const auto& id : split.test_pair_ids) {
    const auto& p = manifest.Pair(id);
    if (train_images.contains(p.image_a)) leaked.insert(p.image_a);
    if (train_images.contains(p.image_b)) leaked.insert(p.image_b);
  }
  return leaked.size();
}

std::string SplitToJson(const SplitSpec& split) {
  json obj = {{"seed", split.seed},
              {"ratio", split.ratio},
              {"train_pair_ids", split.train_pair_ids},
              {"test_pair_ids", split.test_pair_ids}};
  return obj.dump(2) + "\n";
}

SplitSpec SplitFromJson(std::string_view text) {
  try {
    const json obj = json::parse(text);
    SplitSpec split;
    split.seed = obj.at("seed").get<std::uint64_t>();
    split.ratio = obj.value("ratio", 0.8);
    split.train_pair_ids =
        obj.at("train_pair_ids").get<std::vector<std::string>>();
    split.test_pair_ids = obj.at("test_pair_ids").get<std::vector<std::string>>();
    std::sort(split.train_pair_ids.begin(), split.train_pair_ids.end());
    std::sort(split.test_pair_ids.begin(), split.test_pair_ids.end());
    return split;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed split file: ") + e.what());
  }
}

SplitSpec LoadSplit(const std::string& path) {
  return SplitFromJson(ReadFile(path));
}

void SaveSplit(const SplitSpec& split, const std::string& path) {
  WriteFile(path, SplitToJson(split));
}

std::string SplitFingerprint(const SplitSpec& split) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const auto& id : split.test_pair_ids) {
    hash = Fnv1a(id, hash);
    hash = Fnv1a(std::string_view("\n"), hash);
  }
  std::ostringstream out;
  out << std::hex << hash;
  return out.str();
}

std::string CanonicalPairId(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string id(a);
  id += '~';
  id += b;
  return id;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace fgresq
