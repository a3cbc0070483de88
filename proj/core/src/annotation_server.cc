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

#include "fgresq/annotation_server.h"

#include <filesystem>
#include <nlohmann/json.hpp>
#include <thread>

#include "fgresq/error.h"
#include "fgresq/image.h"
#include "httplib.h"

namespace fgresq {

using nlohmann::json;

struct AnnotationHttpServer::Impl {
  AnnotationService& service;
  std::string image_root;
  httplib::Server server;
  std::thread thread;
  int port = -1;

  Impl(AnnotationService& s, std::string root) : service(s), image_root(std::move(root)) {}
};

namespace {

int HttpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConflict:
    case ErrorCode::kInvalidState: return 409;
    case ErrorCode::kAuthorization: return 403;
    case ErrorCode::kNotFound: return 404;
    default: return 400;
  }
}

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, int status, std::string_view code,
               const std::string& message) {
  SendJson(res, status, {{"error", code}, {"message", message}});
}

json StateJson(const PairAnnotationState& st) {
  json votes = json::object();
  for (const auto& [choice, n] : st.votes) votes[std::string(ToString(choice))] = n;
  return {{"pair_id", st.pair_id},
          {"status", ToString(st.status)},
          {"round", st.round},
          {"votes", votes},
          {"submitted", st.submitted},
          {"assigned", st.assigned},
          {"resolved", st.resolved},
          {"final_label", st.final_label ? json(ToString(*st.final_label)) : json(nullptr)}};
}

}  // namespace

AnnotationHttpServer::AnnotationHttpServer(AnnotationService& service,
                                           std::string image_root)
    : impl_(std::make_unique<Impl>(service, std::move(image_root))) {
  Impl* impl = impl_.get();
  using Handler = std::function<void(const AnnotatorProfile&, const httplib::Request&,
                                     httplib::Response&)>;
  // Authenticates, then maps library errors onto HTTP statuses.
  auto guarded = [impl](Handler h) {
    return [impl, h](const httplib::Request& req, httplib::Response& res) {
      const std::string auth = req.get_header_value("Authorization");
      constexpr std::string_view kBearer = "Bearer ";
      const AnnotatorProfile* who = nullptr;
      if (auth.rfind(kBearer, 0) == 0) who = impl->service.Authenticate(auth.substr(kBearer.size()));
      if (who == nullptr) {
        SendError(res, 401, "unauthenticated", "missing or unknown bearer token");
        return;
      }
      try {
        h(*who, req, res);
      } catch (const Error& e) {
        SendError(res, HttpStatus(e.code()), ErrorCodeName(e.code()), e.what());
      } catch (const json::exception& e) {
        SendError(res, 400, "invalid-argument", std::string("malformed request: ") + e.what());
      }
    };
  };
  auto& s = impl->server;

  s.Get("/session", guarded([impl](const AnnotatorProfile& who, const httplib::Request&,
                                   httplib::Response& res) {
    SendJson(res, 200,
             {{"annotator_id", who.annotator_id},
              {"role", ToString(who.role)},
              {"group", who.group},
              {"assigned", impl->service.AssignedPairs(who.annotator_id).size()},
              {"completed", impl->service.CompletedCount(who.annotator_id)}});
  }));

  s.Get("/pairs/next", guarded([impl](const AnnotatorProfile& who, const httplib::Request&,
                                      httplib::Response& res) {
    const auto next = impl->service.Next(who.annotator_id);
    if (!next) {
      res.status = 204;
      return;
    }
    const PairRecord& p = impl->service.manifest().Pair(next->pair_id);
    json body = {{"pair_id", p.pair_id},
                 {"image_a", p.image_a},
                 {"image_b", p.image_b},
                 {"round", next->round},
                 {"image_a_url", "/images/" + p.image_a},
                 {"image_b_url", "/images/" + p.image_b}};
    if (who.role == AnnotatorRole::kExpert) {
      body["status"] = StateJson(impl->service.Status(p.pair_id));
    }
    SendJson(res, 200, body);
  }));

  s.Get("/images/:id", guarded([impl](const AnnotatorProfile&, const httplib::Request& req,
                                      httplib::Response& res) {
    const ImageRecord& r = impl->service.manifest().Image(req.path_params.at("id"));
    std::filesystem::path path(r.path);
    if (path.is_relative()) path = std::filesystem::path(impl->image_root) / path;
    const std::string bytes = ReadFile(path.string());
    res.status = 200;
    res.set_content(bytes, ImageContentType(r.path));
  }));

  s.Post("/preferences", guarded([impl](const AnnotatorProfile& who,
                                        const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const PreferenceRecord r = impl->service.Submit(
        who.annotator_id, body.at("pair_id").get<std::string>(),
        ParsePreference(body.at("choice").get<std::string>()), body.value("round", 1));
    SendJson(res, 201, json::parse(PreferenceRecordToJson(r)));
  }));

  s.Get("/pairs/:id/status", guarded([impl](const AnnotatorProfile&,
                                            const httplib::Request& req, httplib::Response& res) {
    SendJson(res, 200, StateJson(impl->service.Status(req.path_params.at("id"))));
  }));

  s.Post("/resolutions", guarded([impl](const AnnotatorProfile& who,
                                        const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    const ResolutionRecord r = impl->service.Resolve(
        who.annotator_id, body.at("pair_id").get<std::string>(),
        ParsePreference(body.at("final_choice").get<std::string>()),
        body.value("rationale", ""));
    SendJson(res, 201, json::parse(ResolutionRecordToJson(r)));
  }));

  s.Get("/export", guarded([impl](const AnnotatorProfile&, const httplib::Request&,
                                  httplib::Response& res) {
    const AnnotationExport ex = impl->service.Export();
    json records = json::array();
    for (const auto& r : ex.preferences) records.push_back(json::parse(PreferenceRecordToJson(r)));
    for (const auto& r : ex.resolutions) records.push_back(json::parse(ResolutionRecordToJson(r)));
    json labels = json::object();
    for (const auto& p : ex.manifest.pairs) {
      if (p.status == PairStatus::kFineGrained) labels[p.pair_id] = ToString(p.preference);
    }
    SendJson(res, 200, {{"records", records}, {"labels", labels}});
  }));
}

AnnotationHttpServer::~AnnotationHttpServer() { Stop(); }

int AnnotationHttpServer::Start(const std::string& host, int port) {
  auto& s = impl_->server;
  if (port == 0) {
    impl_->port = s.bind_to_any_port(host);
  } else {
    impl_->port = s.bind_to_port(host, port) ? port : -1;
  }
  if (impl_->port < 0) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void AnnotationHttpServer::Wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void AnnotationHttpServer::Stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int AnnotationHttpServer::port() const { return impl_->port; }

}  // namespace fgresq
