#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wfc/planner.hpp"
#include "wfc/qos.hpp"
#include "wfc/similarity.hpp"

namespace wfc {

// One refinement request. Targets name either a concrete service or a
// service class; a class matches every service whose class is it or one of
// its descendants.
struct RefinementRequest {
  enum class Kind { change_io, avoid, include, order_before };

  Kind kind = Kind::avoid;
  std::string target;  // avoid, include
  std::string first;   // order_before: `first` runs before `second`
  std::string second;
  std::optional<std::vector<ResourceSpec>> initial;  // change_io
  std::optional<std::vector<ResourceSpec>> goal;

  static RefinementRequest avoid(std::string t);
  static RefinementRequest include(std::string t);
  static RefinementRequest order_before(std::string x, std::string y);
  static RefinementRequest change_io(std::optional<std::vector<ResourceSpec>> initial,
                                     std::optional<std::vector<ResourceSpec>> goal);

  bool operator==(const RefinementRequest&) const = default;
};

using RequestSet = std::vector<RefinementRequest>;

json request_to_json(const RefinementRequest& r);
RefinementRequest request_from_json(const json& j);
// Accepts a bare array or {"requests": [...]}.
json requests_to_json(const RequestSet& requests);
RequestSet requests_from_json(const json& j);

// Throws UnknownNameError for targets that are neither a service nor a class.
void check_targets(const Registry& registry, const RequestSet& requests);

// True when `service` is `target` or belongs to class `target` transitively.
bool matches(const Registry& registry, const std::string& service, const std::string& target);

// Violations of the request set by a workflow; kinds are "avoid",
// "include", "order_before" and "change_io".
std::vector<Violation> check_constraints(const Registry& registry, const Workflow& workflow, const RequestSet& requests);

// Throws ContradictionError when no workflow can satisfy the set: an
// Include whose services are all avoided, or two different IO changes.
void check_consistency(const Registry& registry, const RequestSet& requests);

enum class SimilarityMode { approx, exact };

SimilarityMode similarity_mode_from_string(const std::string& text);
const char* similarity_mode_name(SimilarityMode mode);

struct RefineOptions {
  SimilarityMode mode = SimilarityMode::exact;
  int horizon = 8;
  std::size_t max_candidates = 500;
  AvailabilityMode availability = AvailabilityMode::min;
  Deadline deadline;
};

struct Candidate {
  Workflow workflow;
  double score = 0.0;  // node level in approx mode, combined in exact mode
  SimilarityReport similarity;
  QoSVector qos;
};

struct RefinementResult {
  SimilarityMode mode = SimilarityMode::exact;
  Workflow original;
  std::vector<Candidate> candidates;  // score descending, then canonical order
  std::size_t satisfying = 0;         // candidates before the cap
  bool truncated = false;             // cap or deadline cut the list
};

json candidate_to_json(const Candidate& c, SimilarityMode mode);
json refinement_result_to_json(const RefinementResult& r);

// Re-plans the original's problem (with any IO change) over every length up
// to the horizon, keeps the workflows that satisfy every request and ranks
// them by similarity to the original. Throws ContradictionError for an
// inconsistent set and NoPlanError when nothing satisfies it.
RefinementResult refine(const SimilarityEngine& engine, const Workflow& original, const RequestSet& requests,
                        const RefineOptions& options = {});

// Best candidate under the mode's score; ties go to canonical order.
// Throws EmptyInputError on an empty list.
std::pair<Workflow, SimilarityReport> most_similar(const SimilarityEngine& engine, const std::vector<Workflow>& candidates,
                                                   const Workflow& original, SimilarityMode mode);

// The score refine ranks by.
SimilarityReport score_against(const SimilarityEngine& engine, const Workflow& candidate, const Workflow& original,
                               SimilarityMode mode, double& score);

}  // namespace wfc
