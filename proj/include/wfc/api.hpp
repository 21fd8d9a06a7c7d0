#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "wfc/session_store.hpp"

namespace wfc {

struct ApiResponse {
  int status = 200;
  json body;
};

struct ApiConfig {
  // Budget per compose or refine call; 0 disables it.
  std::chrono::milliseconds time_budget{30000};
};

// Transport-free request handling; the HTTP layer only forwards method,
// path and body. Errors come back as {"error": {"code", "message"}}:
//   400 malformed body, unknown name    404 unknown registry, session or route
//   422 no plan, contradiction, empty input, time budget exhausted
//   500 store failure
class Api {
 public:
  explicit Api(SessionStore& store, ApiConfig config = {});

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

  // POST /registries: body is a registry document.
  ApiResponse post_registry(const json& body);
  // POST /compose: {"registry": id | document, "problem": {...},
  //   "exhaustive": bool, "ranking": {...}, "limit": n, "create_session": bool}
  ApiResponse post_compose(const json& body);
  // POST /sessions/{id}/refine: {"requests": [...], "mode": "exact"|"approx",
  //   "horizon": n, "max_candidates": n, "weights": similarity weights}
  ApiResponse post_refine(const std::string& session, const json& body);
  // POST /sessions/{id}/select: {"index": i} into the last refine, or {"workflow": {...}}
  ApiResponse post_select(const std::string& session, const json& body);
  ApiResponse get_session(const std::string& session);
  // POST /similarity: {"registry": id | document, "a": wf, "b": wf, "weights": {...}}
  ApiResponse post_similarity(const json& body);
  ApiResponse health() const;

 private:
  std::shared_ptr<const SimilarityEngine> engine(const std::string& registry_id, const json& weights);
  std::string registry_ref(const json& body);
  Deadline deadline() const;

  SessionStore& store_;
  ApiConfig config_;
  std::mutex engines_mutex_;
  // default-weight engines per registry; each holds its registry alive
  std::map<std::string, std::pair<std::shared_ptr<const Registry>, std::shared_ptr<const SimilarityEngine>>> engines_;
};

ApiResponse error_response(int status, const std::string& code, const std::string& message);

}  // namespace wfc
