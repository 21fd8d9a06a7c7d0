#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <type_traits>
#include <vector>

#include "wfc/replanner.hpp"

namespace wfc {

class StoreError : public Error {
 public:
  using Error::Error;
};

// A stored document carries a version this build does not read.
class StoreVersionError : public StoreError {
 public:
  using StoreError::StoreError;
};

class UnknownSessionError : public Error {
 public:
  explicit UnknownSessionError(const std::string& id) : Error("unknown session '" + id + "'") {}
};

class UnknownRegistryError : public Error {
 public:
  explicit UnknownRegistryError(const std::string& id) : Error("unknown registry '" + id + "'") {}
};

inline constexpr int kStoreVersion = 1;

struct HistoryEntry {
  RequestSet requests;
  Workflow chosen;
  std::string timestamp;  // UTC, ISO 8601

  bool operator==(const HistoryEntry&) const = default;
};

struct Session {
  std::string id;
  std::string registry;
  Workflow current;
  std::vector<HistoryEntry> history;
  // The last refine, kept so a later select can refer to a candidate by index.
  RequestSet pending_requests;
  std::vector<Workflow> pending;

  bool operator==(const Session&) const = default;
};

json session_to_json(const Session& s);
Session session_from_json(const json& j);

// Sessions and registries, optionally mirrored to a directory with one
// document per entity:
//   <root>/registries/<id>.json  {"version": 1, "registry": {...}}
//   <root>/sessions/<id>.json    {"version": 1, "session": {...}}
// Operations on one session are serialized; different sessions proceed in
// parallel. Registries are immutable once stored.
class SessionStore {
 public:
  // An empty root keeps everything in memory.
  explicit SessionStore(std::filesystem::path root = {});

  // Reads every stored document. Throws StoreVersionError for an unknown
  // version and StoreError for unreadable or malformed files.
  void load();

  // Validates the document and returns its id, a hash of its canonical
  // form; storing the same registry twice yields the same id.
  std::string put_registry(const json& doc);
  // Throws UnknownRegistryError.
  std::shared_ptr<const Registry> registry(const std::string& id) const;
  std::vector<std::string> registry_ids() const;

  std::string create_session(const std::string& registry_id, const Workflow& current);
  Session snapshot(const std::string& id) const;
  std::vector<std::string> session_ids() const;

  // Runs `fn` on the session under its exclusive lock and persists the
  // result. Throws UnknownSessionError.
  template <class Fn>
  auto update(const std::string& id, Fn&& fn) {
    auto slot = find(id);
    std::lock_guard lock(slot->mutex);
    if constexpr (std::is_void_v<decltype(fn(slot->session))>) {
      fn(slot->session);
      persist(slot->session);
    } else {
      auto out = fn(slot->session);
      persist(slot->session);
      return out;
    }
  }

 private:
  struct Slot {
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Slot> find(const std::string& id) const;
  void persist(const Session& s) const;
  std::string new_id();

  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;  // guards the two maps, not the sessions
  std::map<std::string, std::shared_ptr<const Registry>> registries_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

// Writes through a temporary file so readers never see half a document.
void write_json_file(const std::filesystem::path& path, const json& doc);
json read_json_file(const std::filesystem::path& path);

std::string timestamp_now();

}  // namespace wfc
