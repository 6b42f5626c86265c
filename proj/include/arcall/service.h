// arcall/service.h

// Copyright 2026  The arcall Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

/**
   HTTP/JSON API over the engine and the document store.

     POST /learners                      {"name"}
     GET  /learners/{id}
     GET  /learners/{id}/stats           ?format=csv for the CSV export
     POST /wordlists                     {"name", "level", "words": [...]}
     GET  /wordlists/{id}
     POST /wordlists/{id}/grant          {"index", "granted"}
     POST /sessions                      {"learner_id", "wordlist_id"}
     GET  /sessions/{id}
     POST /sessions/{id}/attempts        WAV body (raw or multipart "audio");
                                         optional Idempotency-Key header
     POST /sessions/{id}/advance         skip a word after OfferRepeat

   Service::handle() is transport independent; HttpServer binds it to
   cpp-httplib.
 */

#ifndef ARCALL_SERVICE_H_
#define ARCALL_SERVICE_H_

#include <map>
#include <memory>
#include <string>

#include "json.hpp"

#include "arcall/acoustic.h"
#include "arcall/call.h"
#include "arcall/store.h"

namespace arcall {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

struct ServiceOptions {
  FeedbackPolicy policy;
  int teacher_limit = 3;
};

class Service {
 public:
  // The model must carry its front end, or match the default one.
  Service(DocumentStore& store, AcousticModel model, ServiceOptions options = {});

  ApiResponse handle(const ApiRequest& request);

  const AcousticModel& model() const { return model_; }

 private:
  ApiResponse create_learner(const nlohmann::json& body);
  ApiResponse get_learner(const std::string& id);
  ApiResponse learner_stats(const std::string& id, bool csv);
  ApiResponse create_wordlist(const nlohmann::json& body);
  ApiResponse get_wordlist(const std::string& id);
  ApiResponse grant_word(const std::string& id, const nlohmann::json& body);
  ApiResponse create_session(const nlohmann::json& body);
  ApiResponse get_session(const std::string& id);
  ApiResponse submit_attempt(const std::string& id, const std::string& wav,
                             const std::string& idempotency_key);
  ApiResponse advance(const std::string& id);

  DocumentStore& store_;
  AcousticModel model_;
  FrameParams front_end_;
  ServiceOptions options_;
};

class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace arcall

#endif  // ARCALL_SERVICE_H_
