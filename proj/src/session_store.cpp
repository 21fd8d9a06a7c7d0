#include "wfc/session_store.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace wfc {

namespace fs = std::filesystem;

namespace {

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

// FNV-1a, enough to name a registry by its content.
std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool safe_id(const std::string& id) {
  return !id.empty() && id.size() <= 64 &&
         std::all_of(id.begin(), id.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-'; });
}

json versioned(const char* key, json body) { return {{"version", kStoreVersion}, {key, std::move(body)}}; }

const json& unwrap(const json& doc, const char* key, const fs::path& path) {
  if (!doc.is_object() || !doc.contains("version")) throw StoreError(path.string() + ": missing version");
  const auto& v = doc.at("version");
  if (!v.is_number_integer() || v.get<long long>() != kStoreVersion)
    throw StoreVersionError(path.string() + ": unsupported store version " + v.dump() + " (expected " +
                            std::to_string(kStoreVersion) + ")");
  if (!doc.contains(key)) throw StoreError(path.string() + ": missing '" + key + "'");
  return doc.at(key);
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

}  // namespace

json session_to_json(const Session& s) {
  json history = json::array();
  for (const auto& h : s.history)
    history.push_back({{"requests", requests_to_json(h.requests).at("requests")},
                       {"chosen", workflow_to_json(h.chosen)},
                       {"timestamp", h.timestamp}});
  json pending = json::array();
  for (const auto& w : s.pending) pending.push_back(workflow_to_json(w));
  return {{"id", s.id},
          {"registry", s.registry},
          {"current", workflow_to_json(s.current)},
          {"history", history},
          {"pending_requests", requests_to_json(s.pending_requests).at("requests")},
          {"pending", pending}};
}

Session session_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("session must be an object");
  auto text = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ParseError(std::string("session.") + key + " must be a string");
    return j.at(key).get<std::string>();
  };
  Session s;
  s.id = text("id");
  s.registry = text("registry");
  if (!j.contains("current")) throw ParseError("session.current is missing");
  s.current = workflow_from_json(j.at("current"));
  for (const auto& h : j.value("history", json::array())) {
    if (!h.is_object() || !h.contains("chosen") || !h.contains("timestamp") || !h.at("timestamp").is_string())
      throw ParseError("session history entries need requests, chosen and timestamp");
    s.history.push_back({requests_from_json(h.value("requests", json::array())), workflow_from_json(h.at("chosen")),
                         h.at("timestamp").get<std::string>()});
  }
  s.pending_requests = requests_from_json(j.value("pending_requests", json::array()));
  for (const auto& w : j.value("pending", json::array())) s.pending.push_back(workflow_from_json(w));
  return s;
}

void write_json_file(const fs::path& path, const json& doc) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw StoreError("cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
    if (!out) throw StoreError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StoreError("cannot replace " + path.string() + ": " + ec.message());
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw StoreError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw StoreError(path.string() + ": " + e.what());
  }
}

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {}

void SessionStore::load() {
  if (root_.empty()) return;
  std::map<std::string, std::shared_ptr<const Registry>> registries;
  std::map<std::string, std::shared_ptr<Slot>> sessions;
  try {
    for (const auto& path : json_files(root_ / "registries")) {
      const json file = read_json_file(path);
      registries[path.stem().string()] =
          std::make_shared<const Registry>(Registry::from_json(unwrap(file, "registry", path)));
    }
    for (const auto& path : json_files(root_ / "sessions")) {
      auto slot = std::make_shared<Slot>();
      const json file = read_json_file(path);
      slot->session = session_from_json(unwrap(file, "session", path));
      if (!registries.count(slot->session.registry))
        throw StoreError(path.string() + ": refers to missing registry '" + slot->session.registry + "'");
      sessions[slot->session.id] = std::move(slot);
    }
  } catch (const StoreError&) {
    throw;
  } catch (const Error& e) {
    throw StoreError(std::string("corrupt store: ") + e.what());
  } catch (const fs::filesystem_error& e) {
    throw StoreError(e.what());
  }
  std::unique_lock lock(mutex_);
  registries_ = std::move(registries);
  sessions_ = std::move(sessions);
}

std::string SessionStore::put_registry(const json& doc) {
  auto registry = std::make_shared<const Registry>(Registry::from_json(doc));
  const json canonical = registry->to_json();
  const std::string id = "reg-" + hex64(fnv1a(canonical.dump()));
  std::unique_lock lock(mutex_);
  if (registries_.count(id)) return id;
  if (!root_.empty()) write_json_file(root_ / "registries" / (id + ".json"), versioned("registry", canonical));
  registries_[id] = std::move(registry);
  return id;
}

std::shared_ptr<const Registry> SessionStore::registry(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = registries_.find(id);
  if (it == registries_.end()) throw UnknownRegistryError(id);
  return it->second;
}

std::vector<std::string> SessionStore::registry_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : registries_) out.push_back(id);
  return out;
}

std::string SessionStore::new_id() {
  static std::mutex rng_mutex;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(rng_mutex);
  return "s-" + hex64(rng());
}

std::string SessionStore::create_session(const std::string& registry_id, const Workflow& current) {
  registry(registry_id);
  auto slot = std::make_shared<Slot>();
  slot->session.registry = registry_id;
  slot->session.current = current;
  std::unique_lock lock(mutex_);
  do slot->session.id = new_id();
  while (sessions_.count(slot->session.id));
  persist(slot->session);
  sessions_[slot->session.id] = slot;
  return slot->session.id;
}

std::shared_ptr<SessionStore::Slot> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSessionError(id);
  return it->second;
}

Session SessionStore::snapshot(const std::string& id) const {
  auto slot = find(id);
  std::lock_guard lock(slot->mutex);
  return slot->session;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

void SessionStore::persist(const Session& s) const {
  if (root_.empty()) return;
  if (!safe_id(s.id)) throw StoreError("refusing to store session id '" + s.id + "'");
  write_json_file(root_ / "sessions" / (s.id + ".json"), versioned("session", session_to_json(s)));
}

std::string timestamp_now() { return now_utc(); }

}  // namespace wfc
