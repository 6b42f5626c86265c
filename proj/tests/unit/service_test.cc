// tests/unit/service_test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "arcall/audio.h"
#include "arcall/error.h"
#include "arcall/service.h"

#include "../support/tempdir.h"

using namespace arcall;
using nlohmann::json;

namespace {

// No score statistics: every alignable attempt gets z = 0 and is accepted.
AcousticModel flat_model() {
  return make_uniform_model(3, std::vector<double>(39, 0.0), std::vector<double>(39, 100.0));
}

std::string wav_bytes(int samples, int channels = 1, int rate = 16000) {
  std::mt19937 rng(samples);
  std::normal_distribution<double> n(0.0, 2000.0);
  std::vector<std::int16_t> pcm(std::size_t(samples) * channels);
  for (auto& s : pcm) s = std::int16_t(std::lround(n(rng)));
  const auto bytes = encode_wav(pcm, rate, channels);
  return std::string(bytes.begin(), bytes.end());
}

struct Fixture {
  testing::TempDir dir;
  DocumentStore store{dir.path()};
  Service service;

  explicit Fixture(ServiceOptions options = {}) : service(store, flat_model(), options) {}

  ApiResponse call(const std::string& method, const std::string& path, const json& body = nullptr,
                   std::map<std::string, std::string> headers = {}) {
    ApiRequest req;
    req.method = method;
    req.path = path;
    if (!body.is_null()) req.body = body.dump();
    req.headers = std::move(headers);
    const auto q = path.find('?');
    if (q != std::string::npos) {
      req.path = path.substr(0, q);
      const std::string query = path.substr(q + 1);
      const auto eq = query.find('=');
      req.query[query.substr(0, eq)] = query.substr(eq + 1);
    }
    return service.handle(req);
  }

  ApiResponse attempt(const std::string& session, const std::string& wav,
                      const std::string& key = "") {
    ApiRequest req;
    req.method = "POST";
    req.path = "/sessions/" + session + "/attempts";
    req.body = wav;
    if (!key.empty()) req.headers["idempotency-key"] = key;
    return service.handle(req);
  }

  std::string learner() {
    return call("POST", "/learners", {{"name", "Amal"}}).json()["id"].get<std::string>();
  }
  std::string wordlist(const json& words, const std::string& level = "A1") {
    auto r = call("POST", "/wordlists", {{"name", "list"}, {"level", level}, {"words", words}});
    REQUIRE(r.status == 201);
    return r.json()["id"].get<std::string>();
  }
  std::string session(const std::string& learner_id, const std::string& wordlist_id) {
    auto r = call("POST", "/sessions", {{"learner_id", learner_id}, {"wordlist_id", wordlist_id}});
    REQUIRE(r.status == 201);
    return r.json()["id"].get<std::string>();
  }
};

}  // namespace

TEST_CASE("health and unknown routes") {
  Fixture f;
  CHECK(f.call("GET", "/health").status == 200);
  CHECK(f.call("GET", "/nothing").status == 404);
  CHECK(f.call("DELETE", "/learners").status == 404);
  const auto active = f.store.get(Collection::kModels, "active");
  REQUIRE(active.has_value());
  CHECK((*active)["feature_dim"] == 39);
}

TEST_CASE("a model without a matching front end is refused") {
  testing::TempDir dir;
  DocumentStore store(dir.path());
  CHECK_THROWS_AS(Service(store, make_uniform_model(3, {0.0, 0.0}, {1.0, 1.0})), arcall::Error);
}

TEST_CASE("learners") {
  Fixture f;
  auto r = f.call("POST", "/learners", {{"name", "Amal"}});
  REQUIRE(r.status == 201);
  const std::string id = r.json()["id"];
  CHECK(f.call("GET", "/learners/" + id).json()["name"] == "Amal");
  CHECK(f.call("POST", "/learners", json::object()).status == 422);
  CHECK(f.call("GET", "/learners/learner-000000000000").status == 404);
  CHECK(f.call("GET", "/learners/..%2F").status == 404);

  ApiRequest bad;
  bad.method = "POST";
  bad.path = "/learners";
  bad.body = "{ nope";
  CHECK(f.service.handle(bad).status == 400);
}

TEST_CASE("word lists") {
  Fixture f;
  auto r = f.call("POST", "/wordlists", {{"name", "w"}, {"level", "A1"}, {"words", {"فِي"}}});
  REQUIRE(r.status == 201);
  const auto item = r.json()["items"][0];
  CHECK(item["class"] == "US");
  CHECK(item["phonemes"] == "F IY");
  CHECK(item["granted"] == true);
  CHECK(item["spans"].size() == 2);
  CHECK(f.call("GET", "/wordlists/" + r.json()["id"].get<std::string>()).status == 200);

  r = f.call("POST", "/wordlists", {{"name", "w"}, {"level", "A1"}, {"words", {"فِي", "كتب"}}});
  CHECK(r.status == 422);
  CHECK(r.json()["error"] == "InvalidWords");
  REQUIRE(r.json()["invalid_words"].size() == 1);
  CHECK(r.json()["invalid_words"][0]["word"] == "كتب");
  CHECK(r.json()["invalid_words"][0]["error"] == "UnvocalizedConsonant");

  r = f.call("POST", "/wordlists", {{"name", "w"}, {"level", "A1"}, {"words", json::array()}});
  CHECK(r.status == 422);
  CHECK(r.json()["error"] == "EmptyWordList");
  CHECK(f.call("POST", "/wordlists", {{"level", "C1"}, {"words", {"فِي"}}}).status == 422);
}

TEST_CASE("sessions only carry granted words") {
  Fixture f;
  const auto l = f.learner();
  const auto w = f.wordlist({"فِي", "طَلَبَ"});
  auto r = f.call("POST", "/wordlists/" + w + "/grant", {{"index", 0}, {"granted", false}});
  REQUIRE(r.status == 200);
  CHECK(r.json()["items"][0]["granted"] == false);
  CHECK(f.call("POST", "/wordlists/" + w + "/grant", {{"index", 7}, {"granted", false}}).status ==
        422);

  const auto s = f.session(l, w);
  const auto got = f.call("GET", "/sessions/" + s).json();
  CHECK(got["word_indices"] == json{1});
  CHECK(got["current_word"]["word"] == "طَلَبَ");
  CHECK(got["complete"] == false);

  f.call("POST", "/wordlists/" + w + "/grant", {{"index", 1}, {"granted", false}});
  r = f.call("POST", "/sessions", {{"learner_id", l}, {"wordlist_id", w}});
  CHECK(r.status == 422);
  CHECK(f.call("POST", "/sessions", {{"learner_id", "nobody"}, {"wordlist_id", w}}).status == 404);
  CHECK(f.call("POST", "/sessions", {{"learner_id", l}, {"wordlist_id", "none"}}).status == 404);
  CHECK(f.call("GET", "/sessions/none").status == 404);
}

TEST_CASE("attempts move the session forward") {
  Fixture f;
  const auto l = f.learner();
  const auto s = f.session(l, f.wordlist({"فِي", "طَلَبَ"}));
  const std::string audio = wav_bytes(16000);

  auto r = f.attempt(s, audio);
  REQUIRE(r.status == 201);
  auto j = r.json();
  CHECK(j["verdict"] == "Accepted");
  CHECK(j["next_action"] == "Advance");
  CHECK(j["word"] == "فِي");
  CHECK(j["cursor"] == 1);
  CHECK(j["complete"] == false);
  CHECK(j["per_phoneme"].size() == 2);
  CHECK(j["per_phoneme"][1]["graphemes"]["end"] == 3);
  CHECK(j["alignment"]["frames"] == 98);

  j = f.attempt(s, audio).json();
  CHECK(j["word"] == "طَلَبَ");
  CHECK(j["complete"] == true);
  r = f.attempt(s, audio);
  CHECK(r.status == 409);
  CHECK(r.json()["error"] == "SessionComplete");
  CHECK(f.call("GET", "/sessions/" + s).json()["complete"] == true);

  CHECK(f.attempt("session-missing", audio).status == 404);
}

TEST_CASE("bad uploads are rejected before scoring") {
  Fixture f;
  const auto s = f.session(f.learner(), f.wordlist({"فِي"}));
  auto r = f.attempt(s, wav_bytes(16000, 2));
  CHECK(r.status == 400);
  CHECK(r.json()["error"] == "UnsupportedFormat");
  r = f.attempt(s, wav_bytes(16000, 1, 8000));
  CHECK(r.status == 400);
  CHECK(r.json()["error"] == "UnsupportedFormat");
  r = f.attempt(s, "RIFF....not a wav");
  CHECK(r.status == 400);
  CHECK(f.call("GET", "/sessions/" + s).json()["attempts"].empty());
}

TEST_CASE("idempotent retries") {
  Fixture f;
  const auto s = f.session(f.learner(), f.wordlist({"فِي", "طَلَبَ"}));
  const std::string audio = wav_bytes(12000);
  auto first = f.attempt(s, audio, "k1");
  REQUIRE(first.status == 201);
  auto again = f.attempt(s, audio, "k1");
  CHECK(again.status == 200);
  CHECK(again.json() == first.json());
  CHECK(f.attempt(s, wav_bytes(12001), "k1").status == 409);
  const auto session = f.call("GET", "/sessions/" + s).json();
  CHECK(session["attempts"].size() == 1);
  CHECK(session["cursor"] == 1);
}

TEST_CASE("repeats, the teacher limit and skipping") {
  ServiceOptions opt;
  opt.teacher_limit = 2;
  Fixture f(opt);
  const auto s = f.session(f.learner(), f.wordlist({"فِي", "طَلَبَ"}));
  const std::string tiny = wav_bytes(800);  // 3 frames for 6 states

  CHECK(f.call("POST", "/sessions/" + s + "/advance").status == 409);
  auto j = f.attempt(s, tiny).json();
  CHECK(j["verdict"] == "Rejected");
  CHECK(j["alignment"].is_null());
  CHECK(j["next_action"] == "RepeatRequired");
  CHECK(j["repeats_so_far"] == 0);
  auto adv = f.call("POST", "/sessions/" + s + "/advance");
  CHECK(adv.status == 409);
  CHECK(adv.json()["error"] == "RepeatRequired");

  j = f.attempt(s, tiny).json();
  CHECK(j["next_action"] == "RepeatRequired");
  j = f.attempt(s, tiny).json();
  CHECK(j["repeats_so_far"] == 2);
  CHECK(j["next_action"] == "OfferRepeat");
  CHECK(j["cursor"] == 0);

  adv = f.call("POST", "/sessions/" + s + "/advance");
  REQUIRE(adv.status == 200);
  CHECK(adv.json()["cursor"] == 1);
  CHECK(f.call("GET", "/sessions/" + s).json()["current_word"]["word"] == "طَلَبَ");
}

TEST_CASE("learner statistics") {
  Fixture f;
  const auto l = f.learner();
  auto r = f.call("GET", "/learners/" + l + "/stats");
  REQUIRE(r.status == 200);
  CHECK(r.json()["attempts"] == 0);
  CHECK(r.json()["classes"].empty());
  CHECK(f.call("GET", "/learners/nobody/stats").status == 404);

  const auto s = f.session(l, f.wordlist({"فِي", "طَلَبَ"}));
  f.attempt(s, wav_bytes(800));
  f.attempt(s, wav_bytes(16000));
  f.attempt(s, wav_bytes(16000));
  const auto j = f.call("GET", "/learners/" + l + "/stats").json();
  CHECK(j["attempts"] == 3);
  REQUIRE(j["classes"].size() == 2);
  CHECK(j["classes"][0]["class"] == "EL");
  CHECK(j["classes"][1]["class"] == "US");
  CHECK(j["classes"][1]["success_rate"].get<double>() == doctest::Approx(50.0));
  CHECK(j["levels"][0]["attempts"] == 3);

  r = f.call("GET", "/learners/" + l + "/stats?format=csv");
  CHECK(r.content_type == "text/csv");
  CHECK(r.body ==
        "learner_id,class,attempts,accepted,success_rate\n" + l + ",EL,1,1,100.0\n" + l +
            ",US,2,1,50.0\n");
}

TEST_CASE("over HTTP with a multipart upload") {
  Fixture f;
  const auto s = f.session(f.learner(), f.wordlist({"فِي"}));
  HttpServer server(f.service);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread t([&] { server.listen(); });

  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  httplib::MultipartFormDataItems items{{"audio", wav_bytes(16000), "a.wav", "audio/wav"}};
  auto res = cli.Post("/sessions/" + s + "/attempts", items);
  REQUIRE(res);
  CHECK(res->status == 201);
  CHECK(json::parse(res->body)["verdict"] == "Accepted");

  auto opts = cli.Options("/sessions");
  REQUIRE(opts);
  CHECK(opts->status == 204);

  server.stop();
  t.join();
}
