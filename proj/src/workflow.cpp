#include "wfc/workflow.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <tuple>

namespace wfc {

namespace {

const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

std::size_t index_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw ParseError(where + ": field '" + key + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

const json& array_field(const json& obj, const char* key, const std::string& where) {
  const auto& v = field(obj, key, where);
  if (!v.is_array()) throw ParseError(where + ": field '" + key + "' must be an array");
  return v;
}

using Canonical = std::tuple<std::size_t, std::vector<std::string>, std::vector<std::tuple<int, int, std::string, std::string>>,
                             std::vector<std::tuple<std::size_t, int, std::string>>,
                             std::vector<std::tuple<std::size_t, int, std::string, long>>, std::vector<ResourceSpec>,
                             std::vector<ResourceSpec>>;

Canonical canonical_form(const Workflow& w) {
  std::map<std::string, int> step;
  for (const auto& n : w.nodes) step[n.id] = n.step;
  auto step_of = [&](const std::string& id) {
    auto it = step.find(id);
    return it == step.end() ? -1 : it->second;
  };
  std::vector<std::tuple<int, int, std::string, std::string>> edges;
  for (const auto& e : w.edges) edges.emplace_back(step_of(e.src), step_of(e.dst), e.out_port, e.in_port);
  std::sort(edges.begin(), edges.end());
  std::vector<std::tuple<std::size_t, int, std::string>> sources;
  for (const auto& s : w.sources) sources.emplace_back(s.initial, step_of(s.dst), s.in_port);
  std::sort(sources.begin(), sources.end());
  std::vector<std::tuple<std::size_t, int, std::string, long>> sinks;
  for (const auto& s : w.sinks)
    sinks.emplace_back(s.goal, s.src.empty() ? 0 : step_of(s.src), s.out_port,
                       s.initial ? static_cast<long>(*s.initial) : -1L);
  std::sort(sinks.begin(), sinks.end());
  return {w.nodes.size(), w.service_sequence(), std::move(edges), std::move(sources), std::move(sinks), w.initial, w.goal};
}

}  // namespace

void check_problem(const Registry& registry, const CompositionProblem& problem) {
  if (problem.horizon < 1) throw IntegrityError("horizon", "horizon must be at least 1");
  for (const auto* specs : {&problem.initial, &problem.goal}) {
    for (const auto& r : *specs) {
      if (!registry.resource_taxonomy().contains(r.resource))
        throw IntegrityError(r.resource, "unknown resource class '" + r.resource + "'");
      if (!registry.has_format(r.format)) throw IntegrityError(r.format, "unknown format '" + r.format + "'");
    }
  }
}

const WorkflowNode* Workflow::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

std::vector<std::string> Workflow::service_sequence() const {
  std::vector<const WorkflowNode*> ordered;
  for (const auto& n : nodes) ordered.push_back(&n);
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->step < b->step; });
  std::vector<std::string> out;
  for (const auto* n : ordered) out.push_back(n->service);
  return out;
}

json resource_specs_to_json(const std::vector<ResourceSpec>& specs) {
  json arr = json::array();
  for (const auto& r : specs) arr.push_back({{"resource", r.resource}, {"format", r.format}});
  return arr;
}

std::vector<ResourceSpec> resource_specs_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  std::vector<ResourceSpec> out;
  for (const auto& r : j) out.push_back({string_field(r, "resource", where), string_field(r, "format", where)});
  return out;
}

json problem_to_json(const CompositionProblem& p) {
  return {{"initial", resource_specs_to_json(p.initial)},
          {"goal", resource_specs_to_json(p.goal)},
          {"horizon", p.horizon}};
}

CompositionProblem problem_from_json(const json& j) {
  CompositionProblem p;
  p.initial = resource_specs_from_json(field(j, "initial", "problem"), "problem.initial");
  p.goal = resource_specs_from_json(field(j, "goal", "problem"), "problem.goal");
  if (auto it = j.find("horizon"); it != j.end()) {
    if (!it->is_number_integer()) throw ParseError("problem: field 'horizon' must be an integer");
    p.horizon = it->get<int>();
  }
  return p;
}

json workflow_to_json(const Workflow& w) {
  json doc;
  doc["initial"] = resource_specs_to_json(w.initial);
  doc["goal"] = resource_specs_to_json(w.goal);
  doc["nodes"] = json::array();
  for (const auto& n : w.nodes) doc["nodes"].push_back({{"id", n.id}, {"service", n.service}, {"step", n.step}});
  doc["edges"] = json::array();
  for (const auto& e : w.edges)
    doc["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"out_port", e.out_port}, {"in_port", e.in_port}});
  doc["sources"] = json::array();
  for (const auto& s : w.sources)
    doc["sources"].push_back({{"initial", s.initial}, {"dst", s.dst}, {"in_port", s.in_port}});
  doc["sinks"] = json::array();
  for (const auto& s : w.sinks) {
    if (s.initial)
      doc["sinks"].push_back({{"goal", s.goal}, {"initial", *s.initial}});
    else
      doc["sinks"].push_back({{"goal", s.goal}, {"src", s.src}, {"out_port", s.out_port}});
  }
  return doc;
}

Workflow workflow_from_json(const json& j) {
  const std::string where = "workflow";
  Workflow w;
  w.initial = resource_specs_from_json(field(j, "initial", where), "workflow.initial");
  w.goal = resource_specs_from_json(field(j, "goal", where), "workflow.goal");
  for (const auto& n : array_field(j, "nodes", where)) {
    const auto& step = field(n, "step", "workflow.nodes");
    if (!step.is_number_integer()) throw ParseError("workflow.nodes: field 'step' must be an integer");
    w.nodes.push_back({string_field(n, "id", "workflow.nodes"), string_field(n, "service", "workflow.nodes"),
                       step.get<int>()});
  }
  for (const auto& e : array_field(j, "edges", where)) {
    const std::string at = "workflow.edges";
    w.edges.push_back(
        {string_field(e, "src", at), string_field(e, "dst", at), string_field(e, "out_port", at), string_field(e, "in_port", at)});
  }
  if (j.contains("sources")) {
    for (const auto& s : array_field(j, "sources", where)) {
      const std::string at = "workflow.sources";
      w.sources.push_back({index_field(s, "initial", at), string_field(s, "dst", at), string_field(s, "in_port", at)});
    }
  }
  if (j.contains("sinks")) {
    for (const auto& s : array_field(j, "sinks", where)) {
      const std::string at = "workflow.sinks";
      SinkBinding b;
      b.goal = index_field(s, "goal", at);
      if (s.contains("initial")) {
        b.initial = index_field(s, "initial", at);
      } else {
        b.src = string_field(s, "src", at);
        b.out_port = string_field(s, "out_port", at);
      }
      w.sinks.push_back(std::move(b));
    }
  }
  return w;
}

bool canonical_less(const Workflow& a, const Workflow& b) { return canonical_form(a) < canonical_form(b); }

std::string canonical_key(const Workflow& w) {
  Workflow copy = w;
  std::sort(copy.nodes.begin(), copy.nodes.end(),
            [](const auto& x, const auto& y) { return std::tie(x.step, x.id) < std::tie(y.step, y.id); });
  std::sort(copy.edges.begin(), copy.edges.end());
  std::sort(copy.sources.begin(), copy.sources.end());
  std::sort(copy.sinks.begin(), copy.sinks.end());
  return workflow_to_json(copy).dump();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace wfc
