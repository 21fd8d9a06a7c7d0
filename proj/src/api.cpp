#include "wfc/api.hpp"

#include <regex>

namespace wfc {

namespace {

// Thrown for request shapes the engine never sees.
class BadRequest : public Error {
 public:
  using Error::Error;
};

const json& member(const json& body, const char* key) {
  if (!body.is_object()) throw BadRequest("request body must be a JSON object");
  auto it = body.find(key);
  if (it == body.end()) throw BadRequest(std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T optional_field(const json& body, const char* key, T fallback) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw BadRequest(std::string("field '") + key + "' has the wrong type");
  }
}

json workflows_json(const std::vector<RankedWorkflow>& ranked, std::size_t limit) {
  json out = json::array();
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) out.push_back(ranked_to_json(ranked[i]));
  return out;
}

}  // namespace

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

Api::Api(SessionStore& store, ApiConfig config) : store_(store), config_(config) {}

Deadline Api::deadline() const {
  if (config_.time_budget.count() <= 0) return std::nullopt;
  return std::chrono::steady_clock::now() + config_.time_budget;
}

std::string Api::registry_ref(const json& body) {
  const json& ref = member(body, "registry");
  if (ref.is_string()) {
    store_.registry(ref.get<std::string>());
    return ref.get<std::string>();
  }
  if (ref.is_object()) return store_.put_registry(ref);
  throw BadRequest("'registry' must be a registry id or an inline registry document");
}

std::shared_ptr<const SimilarityEngine> Api::engine(const std::string& registry_id, const json& weights) {
  auto registry = store_.registry(registry_id);
  if (!weights.is_null()) {
    auto w = similarity_weights_from_json(weights);
    // the aliasing constructor ties the registry's lifetime to the engine
    auto holder = std::make_shared<std::pair<std::shared_ptr<const Registry>, SimilarityEngine>>(
        registry, SimilarityEngine(*registry, w));
    return {holder, &holder->second};
  }
  std::lock_guard lock(engines_mutex_);
  auto& slot = engines_[registry_id];
  if (!slot.second) {
    slot.first = registry;
    slot.second = std::make_shared<const SimilarityEngine>(*registry);
  }
  return slot.second;
}

ApiResponse Api::handle(const std::string& method, const std::string& path, const std::string& body) {
  static const std::regex session_route(R"(^/sessions/([A-Za-z0-9-]+)(/refine|/select)?$)");
  try {
    auto parsed = [&] {
      try {
        return body.empty() ? json::object() : json::parse(body);
      } catch (const json::parse_error& e) {
        throw BadRequest(std::string("malformed JSON: ") + e.what());
      }
    };
    std::smatch m;
    if (path == "/health") {
      if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
      return health();
    }
    if (path == "/registries" || path == "/compose" || path == "/similarity") {
      if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
      if (path == "/registries") return post_registry(parsed());
      if (path == "/compose") return post_compose(parsed());
      return post_similarity(parsed());
    }
    if (std::regex_match(path, m, session_route)) {
      const std::string id = m[1];
      const std::string action = m[2];
      if (action.empty()) {
        if (method != "GET") return error_response(405, "method_not_allowed", "use GET");
        return get_session(id);
      }
      if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
      return action == "/refine" ? post_refine(id, parsed()) : post_select(id, parsed());
    }
    return error_response(404, "not_found", "no route for " + method + " " + path);
  } catch (const BadRequest& e) {
    return error_response(400, "bad_request", e.what());
  } catch (const ParseError& e) {
    return error_response(400, "invalid_document", e.what());
  } catch (const IntegrityError& e) {
    return error_response(400, "invalid_document", e.what());
  } catch (const UnknownNameError& e) {
    return error_response(400, "unknown_name", e.what());
  } catch (const UnknownRegistryError& e) {
    return error_response(404, "unknown_registry", e.what());
  } catch (const UnknownSessionError& e) {
    return error_response(404, "unknown_session", e.what());
  } catch (const ContradictionError& e) {
    return error_response(422, "contradiction", e.what());
  } catch (const NoPlanError& e) {
    return error_response(422, "no_plan", e.what());
  } catch (const InstantiationError& e) {
    return error_response(422, "no_plan", e.what());
  } catch (const EmptyInputError& e) {
    return error_response(422, "empty_input", e.what());
  } catch (const StoreError& e) {
    return error_response(500, "store_error", e.what());
  } catch (const json::exception& e) {
    return error_response(400, "bad_request", e.what());
  }
}

ApiResponse Api::post_registry(const json& body) {
  if (!body.is_object()) throw BadRequest("registry document must be an object");
  const std::string id = store_.put_registry(body);
  const auto r = store_.registry(id);
  return {201,
          {{"id", id},
           {"service_classes", r->service_classes().size()},
           {"services", r->services().size()}}};
}

ApiResponse Api::post_compose(const json& body) {
  const std::string id = registry_ref(body);
  const auto registry = store_.registry(id);
  const CompositionProblem problem = problem_from_json(member(body, "problem"));
  const RankingSpec spec = ranking_spec_from_json(body.value("ranking", json()));
  PlannerOptions planner;
  planner.exhaustive = optional_field(body, "exhaustive", false);
  planner.deadline = deadline();
  const auto limit = optional_field<std::size_t>(body, "limit", 50);
  const bool create = optional_field(body, "create_session", false);

  ComposeResult composed = compose(*registry, problem, planner);
  json out = {{"registry", id}, {"plan_count", composed.plan_count}, {"truncated", composed.truncated}};
  std::vector<RankedWorkflow> ranked;
  if (!composed.workflows.empty()) ranked = rank(std::move(composed.workflows), *registry, spec);
  out["candidate_count"] = ranked.size();
  out["candidates"] = workflows_json(ranked, limit);
  if (composed.truncated) {
    auto r = error_response(422, "time_budget", "the time budget ran out; candidates are partial");
    r.body["partial"] = true;
    r.body["result"] = std::move(out);
    return r;
  }
  if (create) out["session"] = store_.create_session(id, ranked.front().workflow);
  return {200, out};
}

ApiResponse Api::post_refine(const std::string& session, const json& body) {
  const Session snap = store_.snapshot(session);
  const RequestSet requests = requests_from_json(member(body, "requests"));
  RefineOptions options;
  options.mode = similarity_mode_from_string(optional_field<std::string>(body, "mode", "exact"));
  options.horizon = optional_field(body, "horizon", options.horizon);
  options.max_candidates = optional_field(body, "max_candidates", options.max_candidates);
  if (body.contains("availability"))
    options.availability = availability_from_string(optional_field<std::string>(body, "availability", "min"));
  options.deadline = deadline();
  const auto eng = engine(snap.registry, body.value("weights", json()));

  RefinementResult result = refine(*eng, snap.current, requests, options);
  json out = refinement_result_to_json(result);
  out["session"] = session;
  store_.update(session, [&](Session& s) {
    s.pending_requests = requests;
    s.pending.clear();
    for (const auto& c : result.candidates) s.pending.push_back(c.workflow);
  });
  if (result.truncated && options.deadline && std::chrono::steady_clock::now() > *options.deadline) {
    auto r = error_response(422, "time_budget", "the time budget ran out; candidates are partial");
    r.body["partial"] = true;
    r.body["result"] = std::move(out);
    return r;
  }
  return {200, out};
}

ApiResponse Api::post_select(const std::string& session, const json& body) {
  const Session snap = store_.snapshot(session);
  const auto registry = store_.registry(snap.registry);
  Workflow chosen;
  if (body.is_object() && body.contains("index")) {
    const auto index = optional_field<long long>(body, "index", -1);
    if (index < 0 || static_cast<std::size_t>(index) >= snap.pending.size())
      throw BadRequest("index " + std::to_string(index) + " is outside the last refine's " +
                       std::to_string(snap.pending.size()) + " candidates");
    chosen = snap.pending[static_cast<std::size_t>(index)];
  } else {
    chosen = workflow_from_json(member(body, "workflow"));
  }
  const auto report = validate_workflow(*registry, chosen);
  if (!report.ok()) {
    auto r = error_response(422, "invalid_workflow", "the workflow does not validate against the session registry");
    r.body["violations"] = validation_to_json(report).at("violations");
    return r;
  }
  Session updated = store_.update(session, [&](Session& s) {
    s.history.push_back({s.pending_requests, chosen, timestamp_now()});
    s.current = chosen;
    s.pending.clear();
    s.pending_requests.clear();
    return s;
  });
  return {200, session_to_json(updated)};
}

ApiResponse Api::get_session(const std::string& session) { return {200, session_to_json(store_.snapshot(session))}; }

ApiResponse Api::post_similarity(const json& body) {
  const std::string id = registry_ref(body);
  const Workflow a = workflow_from_json(member(body, "a"));
  const Workflow b = workflow_from_json(member(body, "b"));
  const auto eng = engine(id, body.value("weights", json()));
  return {200, similarity_report_to_json(eng->sim_workflows(a, b))};
}

ApiResponse Api::health() const {
  return {200, {{"status", "ok"}, {"sessions", store_.session_ids().size()}, {"registries", store_.registry_ids().size()}}};
}

}  // namespace wfc
