// src/store.cc

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

#include "arcall/store.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "arcall/error.h"

namespace arcall {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view collection_name(Collection c) {
  switch (c) {
    case Collection::kLearners: return "learners";
    case Collection::kWordlists: return "wordlists";
    case Collection::kSessions: return "sessions";
    case Collection::kModels: return "models";
  }
  return "unknown";
}

namespace {

bool valid_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  for (char ch : id)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) return false;
  return true;
}

void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot create " + tmp.string());
  std::size_t done = 0;
  while (done < text.size()) {
    const ssize_t n = ::write(fd, text.data() + done, text.size() - done);
    if (n <= 0) {
      ::close(fd);
      throw Error(ErrorCode::kIo, "write failed on " + tmp.string());
    }
    done += std::size_t(n);
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

std::optional<json> read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, "corrupt document " + path.string() + ": " + e.what());
  }
}

}  // namespace

DocumentStore::DocumentStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (Collection c : {Collection::kLearners, Collection::kWordlists, Collection::kSessions,
                       Collection::kModels}) {
    fs::create_directories(root_ / collection_name(c), ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + root_.string() + ": " + ec.message());
  }
  const fs::path schema = root_ / "schema.json";
  if (auto doc = read_json(schema)) {
    const int version = doc->value("schema_version", -1);
    if (version != kStoreSchemaVersion)
      throw Error(ErrorCode::kConflict,
                  "store schema version " + std::to_string(version) + " is not supported");
  } else {
    write_atomically(schema, json{{"schema_version", kStoreSchemaVersion}}.dump(2));
  }
  // Leftovers from interrupted writes.
  for (Collection c : {Collection::kLearners, Collection::kWordlists, Collection::kSessions,
                       Collection::kModels})
    for (const auto& entry : fs::directory_iterator(root_ / collection_name(c)))
      if (entry.path().extension() == ".tmp") fs::remove(entry.path(), ec);
}

fs::path DocumentStore::resolve_root(const fs::path& fallback) {
  if (const char* env = std::getenv(kStoreDirEnv); env && *env) return fs::path(env);
  return fallback;
}

fs::path DocumentStore::path_of(Collection c, std::string_view id) const {
  if (!valid_id(id)) throw Error(ErrorCode::kNotFound, "invalid identifier " + std::string(id));
  return root_ / collection_name(c) / (std::string(id) + ".json");
}

std::optional<json> DocumentStore::get(Collection c, std::string_view id) const {
  if (!valid_id(id)) return std::nullopt;
  return read_json(path_of(c, id));
}

bool DocumentStore::contains(Collection c, std::string_view id) const {
  return valid_id(id) && fs::exists(path_of(c, id));
}

void DocumentStore::write_locked(Collection c, std::string_view id, const json& doc) {
  write_atomically(path_of(c, id), doc.dump(2));
}

void DocumentStore::put(Collection c, std::string_view id, const json& doc) {
  std::lock_guard lock(locks_[std::size_t(c)]);
  write_locked(c, id, doc);
}

std::optional<json> DocumentStore::update(
    Collection c, std::string_view id,
    const std::function<std::optional<json>(std::optional<json>)>& fn) {
  std::lock_guard lock(locks_[std::size_t(c)]);
  auto next = fn(get(c, id));
  if (next) write_locked(c, id, *next);
  return next;
}

std::vector<std::string> DocumentStore::ids(Collection c) const {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(root_ / collection_name(c)))
    if (entry.path().extension() == ".json") out.push_back(entry.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::string DocumentStore::new_id(Collection c, std::string_view prefix) {
  static thread_local std::mt19937_64 rng(std::random_device{}());
  std::lock_guard lock(locks_[std::size_t(c)]);
  for (;;) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%012llx", static_cast<unsigned long long>(rng() & 0xffffffffffffULL));
    std::string id = std::string(prefix) + "-" + buf;
    if (!fs::exists(path_of(c, id))) {
      // Placeholder until the caller writes the document.
      write_locked(c, id, json{{"id", id}, {"reserved", true}});
      return id;
    }
  }
}

}  // namespace arcall
