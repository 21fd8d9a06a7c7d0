#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wfc/registry.hpp"

namespace wfc {

// A resource class carried in a particular data format.
struct ResourceSpec {
  std::string resource;
  std::string format;

  auto operator<=>(const ResourceSpec&) const = default;
};

struct CompositionProblem {
  std::vector<ResourceSpec> initial;
  std::vector<ResourceSpec> goal;
  int horizon = 8;

  bool operator==(const CompositionProblem&) const = default;
};

// Throws IntegrityError when a class or format is not in the registry or the
// horizon is not positive.
void check_problem(const Registry& registry, const CompositionProblem& problem);

struct WorkflowNode {
  std::string id;
  std::string service;
  int step = 0;

  auto operator<=>(const WorkflowNode&) const = default;
};

struct WorkflowEdge {
  std::string src;
  std::string dst;
  std::string out_port;
  std::string in_port;

  auto operator<=>(const WorkflowEdge&) const = default;
};

// Initial resource `initial` feeds input `in_port` of node `dst`.
struct SourceBinding {
  std::size_t initial = 0;
  std::string dst;
  std::string in_port;

  auto operator<=>(const SourceBinding&) const = default;
};

// Goal `goal` is delivered either by output `out_port` of node `src`, or
// directly by initial resource `initial` when `src` is empty.
struct SinkBinding {
  std::size_t goal = 0;
  std::string src;
  std::string out_port;
  std::optional<std::size_t> initial;

  auto operator<=>(const SinkBinding&) const = default;
};

struct Workflow {
  std::vector<ResourceSpec> initial;
  std::vector<ResourceSpec> goal;
  std::vector<WorkflowNode> nodes;  // ordered by step
  std::vector<WorkflowEdge> edges;
  std::vector<SourceBinding> sources;
  std::vector<SinkBinding> sinks;

  bool operator==(const Workflow&) const = default;

  const WorkflowNode* find_node(std::string_view id) const;
  std::vector<std::string> service_sequence() const;
};

json problem_to_json(const CompositionProblem& p);
CompositionProblem problem_from_json(const json& j);

json workflow_to_json(const Workflow& w);
Workflow workflow_from_json(const json& j);

json resource_specs_to_json(const std::vector<ResourceSpec>& specs);
std::vector<ResourceSpec> resource_specs_from_json(const json& j, const std::string& where);

// Canonical total order used for every tie-break: node count, then service
// names by step, then edges, sources and sinks.
bool canonical_less(const Workflow& a, const Workflow& b);

// Deterministic textual key; equal keys iff equal workflows.
std::string canonical_key(const Workflow& w);

json read_json_file(const std::string& path);

}  // namespace wfc
