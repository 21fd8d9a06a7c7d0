#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wfc/registry.hpp"
#include "wfc/workflow.hpp"

namespace wfc {

// A resource in the planning state. Step 0 denotes initial resource number
// `slot`; step t > 0 denotes output port number `slot` of the class run at
// step t. Outputs of step t become available to steps t+1 and later.
struct ResourceRef {
  int step = 0;
  std::size_t slot = 0;

  auto operator<=>(const ResourceRef&) const = default;
};

struct StateResource {
  ResourceRef ref;
  std::string resource_class;
};

// Input `input` of the class at step `step` consumes `producer`.
struct Binding {
  int step = 1;
  std::size_t input = 0;
  ResourceRef producer;

  auto operator<=>(const Binding&) const = default;
};

// Sequential plan over service classes, one class per step.
struct AbstractPlan {
  std::vector<std::string> steps;      // steps[t-1] is the class run at step t
  std::vector<Binding> bindings;       // sorted by (step, input)
  std::vector<ResourceRef> goal_bindings;  // one per goal, in goal order

  std::size_t length() const { return steps.size(); }
  auto operator<=>(const AbstractPlan&) const = default;
};

// Every way to feed each input port of `cls` at step `step` from resources
// produced strictly before it. Each choice lists one ref per input port.
std::vector<std::vector<ResourceRef>> executable_bindings(const Registry& registry,
                                                          std::span<const StateResource> state,
                                                          const ServiceClass& cls, int step);

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

struct PlannerOptions {
  bool exhaustive = false;                 // all lengths up to the horizon
  std::set<std::string> excluded_classes;  // never scheduled
  Deadline deadline;
};

struct PlanSet {
  std::vector<AbstractPlan> plans;  // canonical order
  bool truncated = false;           // deadline hit before the search finished
};

// Classes the abstract stage may schedule: at least one output, not a
// format converter, not excluded. Sorted by name.
std::vector<std::string> plannable_classes(const Registry& registry,
                                           const std::set<std::string>& excluded = {});

// Throws IntegrityError for an invalid problem and NoPlanError when nothing
// reaches the goal within the horizon.
PlanSet compose_abstract(const Registry& registry, const CompositionProblem& problem,
                         const PlannerOptions& options = {});

// Independent replay of a plan from the initial state. Returns an empty
// string when the plan is sound, otherwise the first reason it is not.
std::string replay_plan(const Registry& registry, const CompositionProblem& problem, const AbstractPlan& plan);

bool plan_canonical_less(const AbstractPlan& a, const AbstractPlan& b);

struct InstantiateOptions {
  std::set<std::string> excluded_services;
  int max_converter_chain = 3;
};

// Concrete workflows for one abstract plan; format mismatches are repaired
// with shortest converter chains. Throws InstantiationError when none exist.
std::vector<Workflow> instantiate(const Registry& registry, const CompositionProblem& problem,
                                  const AbstractPlan& plan, const InstantiateOptions& options = {});

struct ComposeResult {
  std::vector<Workflow> workflows;  // deduplicated, canonical order
  std::size_t plan_count = 0;
  bool truncated = false;
};

// compose_abstract followed by instantiate over every plan.
ComposeResult compose(const Registry& registry, const CompositionProblem& problem,
                      const PlannerOptions& planner = {}, const InstantiateOptions& inst = {});

struct Violation {
  std::string kind;
  std::string subject;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_workflow(const Registry& registry, const Workflow& workflow);

json validation_to_json(const ValidationReport& report);
ValidationReport validation_from_json(const json& j);

}  // namespace wfc
