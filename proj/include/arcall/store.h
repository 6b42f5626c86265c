// arcall/store.h

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
   On-disk JSON document store: one file per document under
   <root>/<collection>/<id>.json, replaced atomically on every write
   (write to a temporary file, fsync, rename). Writes are serialized per
   collection; reads never see a half-written document.
 */

#ifndef ARCALL_STORE_H_
#define ARCALL_STORE_H_

#include <array>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace arcall {

inline constexpr int kStoreSchemaVersion = 1;
inline constexpr const char* kStoreDirEnv = "ARCALL_STORE_DIR";

enum class Collection { kLearners, kWordlists, kSessions, kModels };
std::string_view collection_name(Collection c);

class DocumentStore {
 public:
  // Creates the layout if missing. Throws kConflict if the directory holds a
  // store of another schema version, kIo on filesystem errors.
  explicit DocumentStore(std::filesystem::path root);

  // $ARCALL_STORE_DIR when set and non-empty, otherwise `fallback`.
  static std::filesystem::path resolve_root(const std::filesystem::path& fallback);

  const std::filesystem::path& root() const { return root_; }

  std::optional<nlohmann::json> get(Collection c, std::string_view id) const;
  void put(Collection c, std::string_view id, const nlohmann::json& doc);
  bool contains(Collection c, std::string_view id) const;
  std::vector<std::string> ids(Collection c) const;

  // Read-modify-write under the collection's write lock. `fn` receives the
  // current document (nullopt if absent) and returns the new one, or nullopt
  // to leave the store untouched. Returns what was written.
  std::optional<nlohmann::json> update(
      Collection c, std::string_view id,
      const std::function<std::optional<nlohmann::json>(std::optional<nlohmann::json>)>& fn);

  // Fresh random identifier "<prefix>-<hex>", reserved with a placeholder
  // document until the caller writes the real one.
  std::string new_id(Collection c, std::string_view prefix);

 private:
  std::filesystem::path path_of(Collection c, std::string_view id) const;
  void write_locked(Collection c, std::string_view id, const nlohmann::json& doc);

  std::filesystem::path root_;
  mutable std::array<std::mutex, 4> locks_;
};

}  // namespace arcall

#endif  // ARCALL_STORE_H_
