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

// HTTP front end for AnnotationService. All routes require
// "Authorization: Bearer <token>".
//
//   GET  /session              profile and progress
//   GET  /pairs/next           next pair to vote on (204 when done)
//   GET  /images/{id}          image bytes
//   POST /preferences          {"pair_id","choice","round"?}
//   GET  /pairs/{id}/status    votes, status, final label
//   POST /resolutions          {"pair_id","final_choice","rationale"?}  (experts)
//   GET  /export               every record plus final labels
//
// Errors come back as {"error": code, "message": text} with 400, 401, 403,
// 404 or 409.

#ifndef FGRESQ_ANNOTATION_SERVER_H_
#define FGRESQ_ANNOTATION_SERVER_H_

#include <memory>
#include <string>

#include "fgresq/annotation.h"

namespace fgresq {

class AnnotationHttpServer {
 public:
  // Image paths are resolved against `image_root`.
  AnnotationHttpServer(AnnotationService& service, std::string image_root);
  ~AnnotationHttpServer();

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Throws Error(kIo) when binding fails.
  int Start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks until Stop() is called from another thread or a signal handler.
  void Wait();
  void Stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fgresq

#endif  // FGRESQ_ANNOTATION_SERVER_H_
