#include "wfc/replanner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <set>
#include <thread>

namespace wfc {

namespace {

std::string text_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) throw ParseError(std::string("request: field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool is_class(const Registry& registry, const std::string& name) { return registry.find_service_class(name) != nullptr; }

std::string io_text(const std::vector<ResourceSpec>& specs) {
  std::string out;
  for (const auto& s : specs) out += (out.empty() ? "" : ", ") + s.resource + "/" + s.format;
  return "[" + out + "]";
}

const RefinementRequest* io_change(const RequestSet& requests) {
  const RefinementRequest* found = nullptr;
  for (const auto& r : requests)
    if (r.kind == RefinementRequest::Kind::change_io) found = &r;
  return found;
}

bool better(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  return canonical_less(a.workflow, b.workflow);
}

}  // namespace

RefinementRequest RefinementRequest::avoid(std::string t) {
  RefinementRequest r;
  r.kind = Kind::avoid;
  r.target = std::move(t);
  return r;
}

RefinementRequest RefinementRequest::include(std::string t) {
  RefinementRequest r;
  r.kind = Kind::include;
  r.target = std::move(t);
  return r;
}

RefinementRequest RefinementRequest::order_before(std::string x, std::string y) {
  RefinementRequest r;
  r.kind = Kind::order_before;
  r.first = std::move(x);
  r.second = std::move(y);
  return r;
}

RefinementRequest RefinementRequest::change_io(std::optional<std::vector<ResourceSpec>> initial,
                                               std::optional<std::vector<ResourceSpec>> goal) {
  RefinementRequest r;
  r.kind = Kind::change_io;
  r.initial = std::move(initial);
  r.goal = std::move(goal);
  return r;
}

json request_to_json(const RefinementRequest& r) {
  switch (r.kind) {
    case RefinementRequest::Kind::avoid: return {{"type", "avoid"}, {"target", r.target}};
    case RefinementRequest::Kind::include: return {{"type", "include"}, {"target", r.target}};
    case RefinementRequest::Kind::order_before:
      return {{"type", "order_before"}, {"before", r.first}, {"after", r.second}};
    case RefinementRequest::Kind::change_io: {
      json j = {{"type", "change_io"}};
      if (r.initial) j["initial"] = resource_specs_to_json(*r.initial);
      if (r.goal) j["goal"] = resource_specs_to_json(*r.goal);
      return j;
    }
  }
  return {};
}

RefinementRequest request_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("request: expected an object");
  const std::string type = text_field(j, "type");
  if (type == "avoid") return RefinementRequest::avoid(text_field(j, "target"));
  if (type == "include") return RefinementRequest::include(text_field(j, "target"));
  if (type == "order_before") return RefinementRequest::order_before(text_field(j, "before"), text_field(j, "after"));
  if (type == "change_io") {
    std::optional<std::vector<ResourceSpec>> initial, goal;
    if (j.contains("initial")) initial = resource_specs_from_json(j.at("initial"), "request.initial");
    if (j.contains("goal")) goal = resource_specs_from_json(j.at("goal"), "request.goal");
    if (!initial && !goal) throw ParseError("change_io request needs 'initial' or 'goal'");
    return RefinementRequest::change_io(std::move(initial), std::move(goal));
  }
  throw ParseError("unknown request type '" + type + "'");
}

json requests_to_json(const RequestSet& requests) {
  json out = json::array();
  for (const auto& r : requests) out.push_back(request_to_json(r));
  return {{"requests", out}};
}

RequestSet requests_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object()) {
    auto it = j.find("requests");
    if (it == j.end()) throw ParseError("request document needs a 'requests' array");
    list = &*it;
  }
  if (!list->is_array()) throw ParseError("requests must be an array");
  RequestSet out;
  for (const auto& r : *list) out.push_back(request_from_json(r));
  return out;
}

bool matches(const Registry& registry, const std::string& service, const std::string& target) {
  if (service == target) return true;
  if (!is_class(registry, target)) return false;
  const auto* s = registry.find_service(service);
  return s && registry.service_taxonomy().is_subclass(s->service_class, target);
}

void check_targets(const Registry& registry, const RequestSet& requests) {
  auto known = [&](const std::string& name) {
    if (!registry.find_service(name) && !is_class(registry, name)) throw UnknownNameError(name);
  };
  for (const auto& r : requests) {
    switch (r.kind) {
      case RefinementRequest::Kind::avoid:
      case RefinementRequest::Kind::include: known(r.target); break;
      case RefinementRequest::Kind::order_before:
        known(r.first);
        known(r.second);
        break;
      case RefinementRequest::Kind::change_io: {
        CompositionProblem p;
        p.initial = r.initial.value_or(std::vector<ResourceSpec>{});
        p.goal = r.goal.value_or(std::vector<ResourceSpec>{});
        check_problem(registry, p);
        break;
      }
    }
  }
}

void check_consistency(const Registry& registry, const RequestSet& requests) {
  check_targets(registry, requests);
  std::vector<std::string> avoided;
  for (const auto& r : requests)
    if (r.kind == RefinementRequest::Kind::avoid) avoided.push_back(r.target);
  for (const auto& r : requests) {
    if (r.kind != RefinementRequest::Kind::include) continue;
    bool usable = false;
    for (const auto& s : registry.services()) {
      if (!matches(registry, s.name, r.target)) continue;
      if (std::none_of(avoided.begin(), avoided.end(), [&](const std::string& a) { return matches(registry, s.name, a); }))
        usable = true;
    }
    if (!usable) throw ContradictionError("include '" + r.target + "' cannot be met: every matching service is avoided");
  }
  const RefinementRequest* first_io = nullptr;
  for (const auto& r : requests) {
    if (r.kind != RefinementRequest::Kind::change_io) continue;
    if (first_io && (first_io->initial != r.initial || first_io->goal != r.goal))
      throw ContradictionError("two different input/output changes requested");
    first_io = &r;
  }
}

std::vector<Violation> check_constraints(const Registry& registry, const Workflow& workflow, const RequestSet& requests) {
  check_targets(registry, requests);
  std::vector<Violation> out;
  auto steps_of = [&](const std::string& target) {
    std::vector<int> steps;
    for (const auto& n : workflow.nodes)
      if (matches(registry, n.service, target)) steps.push_back(n.step);
    return steps;
  };
  auto included = [&](const std::string& target) {
    return std::any_of(requests.begin(), requests.end(), [&](const RefinementRequest& r) {
      return r.kind == RefinementRequest::Kind::include && r.target == target;
    });
  };
  for (const auto& r : requests) {
    switch (r.kind) {
      case RefinementRequest::Kind::avoid:
        for (const auto& n : workflow.nodes)
          if (matches(registry, n.service, r.target))
            out.push_back({"avoid", n.id, "node " + n.id + " (" + n.service + ") uses avoided '" + r.target + "'"});
        break;
      case RefinementRequest::Kind::include:
        if (steps_of(r.target).empty())
          out.push_back({"include", r.target, "no node uses '" + r.target + "'"});
        break;
      case RefinementRequest::Kind::order_before: {
        auto xs = steps_of(r.first);
        auto ys = steps_of(r.second);
        const std::string subject = r.first + " < " + r.second;
        if (xs.empty() || ys.empty()) {
          // vacuous unless the missing side is itself required
          if ((xs.empty() && included(r.first)) || (ys.empty() && included(r.second)))
            out.push_back({"order_before", subject, "'" + r.first + "' before '" + r.second + "' cannot hold: an included side is missing"});
          break;
        }
        if (*std::min_element(xs.begin(), xs.end()) >= *std::max_element(ys.begin(), ys.end()))
          out.push_back({"order_before", subject, "'" + r.first + "' does not run before '" + r.second + "'"});
        break;
      }
      case RefinementRequest::Kind::change_io:
        if (r.initial && workflow.initial != *r.initial)
          out.push_back({"change_io", "initial", "initial resources are " + io_text(workflow.initial) + ", not " + io_text(*r.initial)});
        if (r.goal && workflow.goal != *r.goal)
          out.push_back({"change_io", "goal", "goal resources are " + io_text(workflow.goal) + ", not " + io_text(*r.goal)});
        break;
    }
  }
  return out;
}

SimilarityMode similarity_mode_from_string(const std::string& text) {
  if (text == "approx" || text == "node-approx") return SimilarityMode::approx;
  if (text == "exact") return SimilarityMode::exact;
  throw ParseError("mode must be 'approx' or 'exact', not '" + text + "'");
}

const char* similarity_mode_name(SimilarityMode mode) { return mode == SimilarityMode::approx ? "approx" : "exact"; }

SimilarityReport score_against(const SimilarityEngine& engine, const Workflow& candidate, const Workflow& original,
                               SimilarityMode mode, double& score) {
  SimilarityReport r;
  r.weights = engine.weights();
  if (candidate.nodes.empty() && original.nodes.empty()) {
    // two empty workflows are the same workflow
    r.node_level = r.edge_level = r.topo_level = r.combined = 1.0;
    score = 1.0;
    return r;
  }
  if (mode == SimilarityMode::exact) {
    r = engine.sim_workflows(candidate, original);
    score = r.combined;
    return r;
  }
  for (const auto& n : candidate.nodes) r.rows.push_back(n.id);
  for (const auto& n : original.nodes) r.cols.push_back(n.id);
  for (const auto& a : candidate.nodes) {
    std::vector<double> row;
    for (const auto& b : original.nodes) row.push_back(engine.sim_nodes(a.service, b.service));
    r.node_matrix.push_back(std::move(row));
  }
  r.node_level = engine.sim_nodes_workflows(candidate, original);
  score = r.node_level;
  return r;
}

json candidate_to_json(const Candidate& c, SimilarityMode mode) {
  json sim;
  if (mode == SimilarityMode::exact) {
    sim = similarity_report_to_json(c.similarity);
  } else {
    const auto& r = c.similarity;
    sim = {{"node_level", r.node_level}, {"node_matrix", {{"rows", r.rows}, {"cols", r.cols}, {"values", r.node_matrix}}}};
  }
  return {{"workflow", workflow_to_json(c.workflow)},
          {"score", c.score},
          {"similarity", sim},
          {"qos", qos_to_json(c.qos)}};
}

json refinement_result_to_json(const RefinementResult& r) {
  json candidates = json::array();
  for (const auto& c : r.candidates) candidates.push_back(candidate_to_json(c, r.mode));
  return {{"mode", similarity_mode_name(r.mode)},
          {"original", workflow_to_json(r.original)},
          {"candidates", candidates},
          {"satisfying", r.satisfying},
          {"truncated", r.truncated}};
}

RefinementResult refine(const SimilarityEngine& engine, const Workflow& original, const RequestSet& requests,
                        const RefineOptions& options) {
  const Registry& registry = engine.registry();
  check_consistency(registry, requests);

  CompositionProblem problem;
  problem.initial = original.initial;
  problem.goal = original.goal;
  problem.horizon = options.horizon;
  if (const auto* io = io_change(requests)) {
    if (io->initial) problem.initial = *io->initial;
    if (io->goal) problem.goal = *io->goal;
  }
  check_problem(registry, problem);

  PlannerOptions planner;
  planner.exhaustive = true;
  planner.deadline = options.deadline;
  InstantiateOptions inst;
  for (const auto& r : requests) {
    if (r.kind != RefinementRequest::Kind::avoid) continue;
    for (const auto& s : registry.services())
      if (matches(registry, s.name, r.target)) inst.excluded_services.insert(s.name);
    if (is_class(registry, r.target))
      for (const auto& c : registry.service_classes())
        if (registry.service_taxonomy().is_subclass(c.name, r.target)) planner.excluded_classes.insert(c.name);
  }

  RefinementResult result;
  result.mode = options.mode;
  result.original = original;

  ComposeResult composed;
  try {
    composed = compose(registry, problem, planner, inst);
  } catch (const NoPlanError&) {
  } catch (const InstantiationError&) {
  }
  result.truncated = composed.truncated;

  std::vector<Workflow> passing;
  for (auto& w : composed.workflows)
    if (check_constraints(registry, w, requests).empty()) passing.push_back(std::move(w));
  result.satisfying = passing.size();

  std::vector<std::optional<Candidate>> scored(passing.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> late{false};
  auto work = [&] {
    for (std::size_t i = next++; i < passing.size(); i = next++) {
      if (options.deadline && std::chrono::steady_clock::now() > *options.deadline) {
        late = true;
        return;
      }
      Candidate c;
      c.similarity = score_against(engine, passing[i], original, options.mode, c.score);
      c.qos = aggregate_qos(registry, passing[i], options.availability);
      c.workflow = std::move(passing[i]);
      scored[i] = std::move(c);
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), (passing.size() + 63) / 64);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (late) result.truncated = true;

  std::vector<Candidate> kept;
  for (auto& c : scored)
    if (c) kept.push_back(std::move(*c));
  if (kept.size() > options.max_candidates) {
    std::partial_sort(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(options.max_candidates), kept.end(), better);
    kept.resize(options.max_candidates);
    result.truncated = true;
  }
  std::sort(kept.begin(), kept.end(), better);
  result.candidates = std::move(kept);
  if (result.candidates.empty() && !result.truncated)
    throw NoPlanError("no workflow within " + std::to_string(options.horizon) + " steps satisfies the requests");
  return result;
}

std::pair<Workflow, SimilarityReport> most_similar(const SimilarityEngine& engine, const std::vector<Workflow>& candidates,
                                                   const Workflow& original, SimilarityMode mode) {
  if (candidates.empty()) throw EmptyInputError("no candidates to choose from");
  std::optional<Candidate> best;
  for (const auto& w : candidates) {
    Candidate c;
    c.similarity = score_against(engine, w, original, mode, c.score);
    c.workflow = w;
    if (!best || better(c, *best)) best = std::move(c);
  }
  return {std::move(best->workflow), std::move(best->similarity)};
}

}  // namespace wfc
