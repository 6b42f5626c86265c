// src/service.cc

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

#include "arcall/service.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <functional>
#include <sstream>

#include "httplib.h"

#include "arcall/audio.h"
#include "arcall/decoder.h"
#include "arcall/error.h"
#include "arcall/lexicon.h"

namespace arcall {

using nlohmann::json;

namespace {

ApiResponse reply(int status, const json& body) {
  return ApiResponse{status, "application/json", body.dump(2)};
}

ApiResponse fail(int status, std::string_view code, const std::string& message) {
  return reply(status, json{{"error", code}, {"message", message}});
}

std::string now_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string digest(const std::string& bytes) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%016zx-%zu", std::hash<std::string>{}(bytes), bytes.size());
  return buf;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(path);
  while (std::getline(in, part, '/'))
    if (!part.empty()) out.push_back(part);
  return out;
}

json item_to_json(std::size_t index, const WordItem& item) {
  json spans = json::array();
  for (const auto& s : item.spans)
    spans.push_back({{"phoneme", symbol(s.phoneme)},
                     {"begin", s.grapheme_begin},
                     {"end", s.grapheme_end}});
  return json{{"index", index},
              {"word", item.word},
              {"level", level_name(item.level)},
              {"class", class_name(item.phoneme_class)},
              {"phonemes", to_string(item.phonemes)},
              {"spans", spans},
              {"granted", true}};
}

WordItem item_from_json(const json& j, Level level) {
  WordItem item;
  item.word = j.at("word").get<std::string>();
  item.level = level;
  item.phonemes = parse_phoneme_list(j.at("phonemes").get<std::string>());
  item.phoneme_class = *parse_class(j.at("class").get<std::string>());
  for (const auto& s : j.at("spans"))
    item.spans.push_back({*parse_phoneme(s.at("phoneme").get<std::string>()),
                          s.at("begin").get<std::size_t>(), s.at("end").get<std::size_t>()});
  return item;
}

json feedback_to_json(const Feedback& fb, const WordItem& item) {
  json per = json::array();
  for (std::size_t i = 0; i < fb.per_phoneme.size(); ++i) {
    const auto& p = fb.per_phoneme[i];
    json row{{"index", i},
             {"phoneme", symbol(p.phoneme)},
             {"score", p.per_frame_score},
             {"z", p.z},
             {"flagged", p.flagged},
             {"start_frame", p.start_frame},
             {"end_frame", p.end_frame}};
    if (fb.per_phoneme.size() == item.spans.size())
      row["graphemes"] = {{"begin", item.spans[i].grapheme_begin},
                          {"end", item.spans[i].grapheme_end}};
    per.push_back(row);
  }
  json out{{"verdict", verdict_name(fb.verdict)},
           {"message", fb.message},
           {"word_z", fb.word_z},
           {"faulty", fb.faulty},
           {"per_phoneme", per}};
  if (fb.alignment) {
    json segs = json::array();
    for (const auto& s : fb.alignment->segments)
      segs.push_back({{"phoneme", symbol(s.phoneme)},
                      {"start_frame", s.start_frame},
                      {"end_frame", s.end_frame},
                      {"score", s.log_score},
                      {"padding", s.padding}});
    out["alignment"] = {{"segments", segs},
                        {"total_score", fb.alignment->total_log_score},
                        {"frames", fb.alignment->frame_count}};
  } else {
    out["alignment"] = nullptr;
  }
  return out;
}

const json* session_word(const json& session, const json& wordlist,
                                      std::size_t cursor) {
  const auto& indices = session.at("word_indices");
  if (cursor >= indices.size()) return nullptr;
  return &wordlist.at("items").at(indices[cursor].get<std::size_t>());
}

bool real_document(const std::optional<json>& doc) {
  return doc && !doc->value("reserved", false);
}

}  // namespace

Service::Service(DocumentStore& store, AcousticModel model, ServiceOptions options)
    : store_(store), model_(std::move(model)), options_(std::move(options)) {
  options_.policy.validate();
  front_end_ = model_.front_end().value_or(FrameParams{});
  if (front_end_.feature_dim() != model_.feature_dim())
    throw Error(ErrorCode::kModelFormat,
                "model of dimension " + std::to_string(model_.feature_dim()) +
                    " has no matching front end");
  store_.put(Collection::kModels, "active",
             json{{"id", "active"},
                  {"feature_dim", model_.feature_dim()},
                  {"phonemes_with_stats", model_.score_stats().size()},
                  {"loaded_at", now_utc()}});
}

ApiResponse Service::handle(const ApiRequest& req) {
  const auto parts = split_path(req.path);
  auto body_json = [&]() -> json {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
  };
  try {
    const bool get = req.method == "GET", post = req.method == "POST";
    if (parts.size() == 1 && parts[0] == "health" && get) return reply(200, {{"status", "ok"}});
    if (parts.empty()) return fail(404, "NotFound", "no such route");
    const std::string& head = parts[0];
    if (head == "learners") {
      if (parts.size() == 1 && post) return create_learner(body_json());
      if (parts.size() == 2 && get) return get_learner(parts[1]);
      if (parts.size() == 3 && parts[2] == "stats" && get) {
        auto it = req.query.find("format");
        return learner_stats(parts[1], it != req.query.end() && it->second == "csv");
      }
    } else if (head == "wordlists") {
      if (parts.size() == 1 && post) return create_wordlist(body_json());
      if (parts.size() == 2 && get) return get_wordlist(parts[1]);
      if (parts.size() == 3 && parts[2] == "grant" && post)
        return grant_word(parts[1], body_json());
    } else if (head == "sessions") {
      if (parts.size() == 1 && post) return create_session(body_json());
      if (parts.size() == 2 && get) return get_session(parts[1]);
      if (parts.size() == 3 && parts[2] == "attempts" && post) {
        auto it = req.headers.find("idempotency-key");
        return submit_attempt(parts[1], req.body, it == req.headers.end() ? "" : it->second);
      }
      if (parts.size() == 3 && parts[2] == "advance" && post) return advance(parts[1]);
    }
    return fail(404, "NotFound", "no route for " + req.method + " " + req.path);
  } catch (const json::exception& e) {
    return fail(400, "BadRequest", e.what());
  } catch (const Error& e) {
    return fail(500, error_code_name(e.code()), e.what());
  }
}

ApiResponse Service::create_learner(const json& body) {
  const std::string name = body.value("name", "");
  if (name.empty()) return fail(422, "InvalidArgument", "learner name is required");
  const std::string id = store_.new_id(Collection::kLearners, "learner");
  const json doc{{"id", id}, {"name", name}, {"created_at", now_utc()}};
  store_.put(Collection::kLearners, id, doc);
  return reply(201, doc);
}

ApiResponse Service::get_learner(const std::string& id) {
  auto doc = store_.get(Collection::kLearners, id);
  if (!real_document(doc)) return fail(404, "NotFound", "unknown learner " + id);
  return reply(200, *doc);
}

ApiResponse Service::learner_stats(const std::string& id, bool csv) {
  if (!real_document(store_.get(Collection::kLearners, id)))
    return fail(404, "NotFound", "unknown learner " + id);
  std::vector<AttemptRecord> history;
  for (const auto& sid : store_.ids(Collection::kSessions)) {
    auto s = store_.get(Collection::kSessions, sid);
    if (!real_document(s) || s->value("learner_id", "") != id) continue;
    for (const auto& a : s->at("attempts"))
      history.push_back({id, *parse_class(a.at("class").get<std::string>()),
                         *parse_level(a.at("level").get<std::string>()),
                         *parse_verdict(a.at("verdict").get<std::string>())});
  }
  const auto classes = aggregate_stats(history);
  if (csv) return ApiResponse{200, "text/csv", stats_to_csv(classes)};
  json levels = json::array();
  for (const auto& l : aggregate_level_stats(history))
    levels.push_back({{"level", level_name(l.level)},
                      {"attempts", l.attempts},
                      {"accepted", l.accepted},
                      {"success_rate", l.success_rate}});
  return reply(200, json{{"learner_id", id},
                         {"attempts", history.size()},
                         {"classes", json::parse(stats_to_json(classes))},
                         {"levels", levels}});
}

ApiResponse Service::create_wordlist(const json& body) {
  const std::string name = body.value("name", "");
  const auto level = parse_level(body.value("level", ""));
  if (!level) return fail(422, "InvalidArgument", "level must be one of A1, A2, B1");
  if (!body.contains("words") || !body["words"].is_array() || body["words"].empty())
    return fail(422, "EmptyWordList", "the word list is empty");

  json items = json::array(), invalid = json::array();
  for (const auto& w : body["words"]) {
    if (!w.is_string()) {
      invalid.push_back({{"word", w.dump()}, {"error", "not a string"}});
      continue;
    }
    try {
      items.push_back(item_to_json(items.size(), WordItem::from_word(w.get<std::string>(), *level)));
    } catch (const Error& e) {
      invalid.push_back({{"word", w.get<std::string>()},
                         {"error", error_code_name(e.code())},
                         {"message", e.what()}});
    }
  }
  if (!invalid.empty())
    return reply(422, json{{"error", "InvalidWords"},
                           {"message", "some words cannot be phonetized"},
                           {"invalid_words", invalid}});

  const std::string id = store_.new_id(Collection::kWordlists, "wordlist");
  const json doc{{"id", id},
                 {"name", name},
                 {"level", level_name(*level)},
                 {"items", items},
                 {"created_at", now_utc()}};
  store_.put(Collection::kWordlists, id, doc);
  return reply(201, doc);
}

ApiResponse Service::get_wordlist(const std::string& id) {
  auto doc = store_.get(Collection::kWordlists, id);
  if (!real_document(doc)) return fail(404, "NotFound", "unknown word list " + id);
  return reply(200, *doc);
}

ApiResponse Service::grant_word(const std::string& id, const json& body) {
  const auto index = body.at("index").get<std::size_t>();
  const bool granted = body.at("granted").get<bool>();
  ApiResponse out = fail(404, "NotFound", "unknown word list " + id);
  store_.update(Collection::kWordlists, id, [&](std::optional<json> doc) -> std::optional<json> {
    if (!real_document(doc)) return std::nullopt;
    auto& items = (*doc)["items"];
    if (index >= items.size()) {
      out = fail(422, "InvalidArgument", "word index out of range");
      return std::nullopt;
    }
    items[index]["granted"] = granted;
    out = reply(200, *doc);
    return doc;
  });
  return out;
}

ApiResponse Service::create_session(const json& body) {
  const std::string learner = body.value("learner_id", "");
  const std::string wordlist_id = body.value("wordlist_id", "");
  if (!real_document(store_.get(Collection::kLearners, learner)))
    return fail(404, "NotFound", "unknown learner " + learner);
  const auto wordlist = store_.get(Collection::kWordlists, wordlist_id);
  if (!real_document(wordlist)) return fail(404, "NotFound", "unknown word list " + wordlist_id);

  json indices = json::array();
  for (const auto& item : wordlist->at("items"))
    if (item.value("granted", true)) indices.push_back(item.at("index"));
  if (indices.empty()) return fail(422, "EmptyWordList", "no granted words in the list");

  const std::string id = store_.new_id(Collection::kSessions, "session");
  const json doc{{"id", id},
                 {"learner_id", learner},
                 {"wordlist_id", wordlist_id},
                 {"level", wordlist->at("level")},
                 {"word_indices", indices},
                 {"cursor", 0},
                 {"attempts", json::array()},
                 {"idempotency", json::object()},
                 {"created_at", now_utc()}};
  store_.put(Collection::kSessions, id, doc);
  return reply(201, doc);
}

ApiResponse Service::get_session(const std::string& id) {
  auto doc = store_.get(Collection::kSessions, id);
  if (!real_document(doc)) return fail(404, "NotFound", "unknown session " + id);
  auto& s = *doc;
  const std::size_t cursor = s.at("cursor").get<std::size_t>();
  s["complete"] = cursor >= s.at("word_indices").size();
  if (auto wl = store_.get(Collection::kWordlists, s.at("wordlist_id").get<std::string>())) {
    const json* item = session_word(s, *wl, cursor);
    s["current_word"] = item ? *item : json(nullptr);
  }
  return reply(200, s);
}

ApiResponse Service::submit_attempt(const std::string& id, const std::string& wav,
                                    const std::string& key) {
  auto session = store_.get(Collection::kSessions, id);
  if (!real_document(session)) return fail(404, "NotFound", "unknown session " + id);
  const std::string body_digest = digest(wav);
  auto replay = [&](const json& s) -> std::optional<ApiResponse> {
    if (key.empty() || !s.at("idempotency").contains(key)) return std::nullopt;
    const auto& entry = s.at("idempotency").at(key);
    if (entry.at("digest") != body_digest)
      return fail(409, "Conflict", "idempotency key reused with different audio");
    return reply(200, s.at("attempts").at(entry.at("attempt").get<std::size_t>()).at("response"));
  };
  if (auto r = replay(*session)) return *r;

  const std::size_t cursor = session->at("cursor").get<std::size_t>();
  const auto wordlist = store_.get(Collection::kWordlists, session->at("wordlist_id").get<std::string>());
  if (!real_document(wordlist)) return fail(404, "NotFound", "word list of the session is gone");
  const json* item_json = session_word(*session, *wordlist, cursor);
  if (!item_json) return fail(409, "SessionComplete", "every word of the session is done");
  const Level level = *parse_level(wordlist->at("level").get<std::string>());
  const WordItem item = item_from_json(*item_json, level);

  FeatureSequence features;
  try {
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(wav.data());
    features = compute_mfcc(load_wav({bytes, wav.size()}), front_end_);
  } catch (const Error& e) {
    return fail(400, error_code_name(e.code()), e.what());
  }
  const Feedback fb = evaluate_attempt(features, item, model_, options_.policy);

  ApiResponse out;
  store_.update(Collection::kSessions, id, [&](std::optional<json> doc) -> std::optional<json> {
    if (!real_document(doc)) {
      out = fail(404, "NotFound", "unknown session " + id);
      return std::nullopt;
    }
    if (auto r = replay(*doc)) {
      out = *r;
      return std::nullopt;
    }
    if (doc->at("cursor").get<std::size_t>() != cursor) {
      out = fail(409, "Conflict", "the session moved on while the attempt was scored");
      return std::nullopt;
    }
    auto& attempts = (*doc)["attempts"];
    int repeats = 0;
    for (const auto& a : attempts)
      if (a.at("position").get<std::size_t>() == cursor) ++repeats;
    const NextAction action = next_action(fb, repeats, options_.teacher_limit);
    std::size_t next_cursor = cursor;
    if (action == NextAction::kAdvance) ++next_cursor;
    const bool complete = next_cursor >= doc->at("word_indices").size();

    json response = feedback_to_json(fb, item);
    response["attempt"] = attempts.size();
    response["session_id"] = id;
    response["word"] = item.word;
    response["word_index"] = item_json->at("index");
    response["repeats_so_far"] = repeats;
    response["next_action"] = next_action_name(action);
    response["cursor"] = next_cursor;
    response["complete"] = complete;

    attempts.push_back({{"position", cursor},
                        {"word_index", item_json->at("index")},
                        {"timestamp", now_utc()},
                        {"class", class_name(item.phoneme_class)},
                        {"level", level_name(level)},
                        {"verdict", verdict_name(fb.verdict)},
                        {"next_action", next_action_name(action)},
                        {"response", response}});
    if (!key.empty())
      (*doc)["idempotency"][key] = {{"attempt", attempts.size() - 1}, {"digest", body_digest}};
    (*doc)["cursor"] = next_cursor;
    out = reply(201, response);
    return doc;
  });
  return out;
}

ApiResponse Service::advance(const std::string& id) {
  ApiResponse out = fail(404, "NotFound", "unknown session " + id);
  store_.update(Collection::kSessions, id, [&](std::optional<json> doc) -> std::optional<json> {
    if (!real_document(doc)) return std::nullopt;
    const std::size_t cursor = doc->at("cursor").get<std::size_t>();
    if (cursor >= doc->at("word_indices").size()) {
      out = fail(409, "SessionComplete", "every word of the session is done");
      return std::nullopt;
    }
    const json* last = nullptr;
    for (const auto& a : doc->at("attempts"))
      if (a.at("position").get<std::size_t>() == cursor) last = &a;
    if (!last || last->at("next_action") != next_action_name(NextAction::kOfferRepeat)) {
      out = fail(409, "RepeatRequired", "the current word must be attempted again first");
      return std::nullopt;
    }
    (*doc)["cursor"] = cursor + 1;
    out = reply(200, json{{"session_id", id},
                          {"cursor", cursor + 1},
                          {"complete", cursor + 1 >= doc->at("word_indices").size()}});
    return doc;
  });
  return out;
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [k, v] : req.params) api.query[k] = v;
    for (const auto& [k, v] : req.headers) {
      std::string lower = k;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return char(std::tolower(c)); });
      api.headers[lower] = v;
    }
    if (req.is_multipart_form_data()) {
      if (req.has_file("audio"))
        api.body = req.get_file_value("audio").content;
      else if (!req.files.empty())
        api.body = req.files.begin()->second.content;
    } else {
      api.body = req.body;
    }
    const ApiResponse out = impl_->service.handle(api);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  const std::string any = R"(/.*)";
  impl_->server.Get(any, handler);
  impl_->server.Post(any, handler);
  impl_->server.Options(any, [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                     {"Access-Control-Allow-Headers",
                                      "Content-Type, Idempotency-Key"}});
  impl_->server.set_payload_max_length(64 << 20);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace arcall
