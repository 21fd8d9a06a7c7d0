#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <set>
#include <sstream>
#include <string>

#include "wfc/planner.hpp"
#include "wfc/registry.hpp"
#include "wfc/workflow.hpp"

namespace wfc::testing {

inline std::string data_path(const std::string& name) { return std::string(WFC_DATA_DIR) + "/" + name; }

inline const Registry& phylo_registry() {
  static const Registry r = Registry::load_file(data_path("phylo_registry.json"));
  return r;
}

inline CompositionProblem gene_names_problem() {
  return problem_from_json(read_json_file(data_path("gene_names_problem.json")));
}

// Hand-built six-node running example: a..f with the scaled gene tree
// feeding the reconciliation.
inline Workflow running_example() {
  return workflow_from_json(read_json_file(data_path("running_example_workflow.json")));
}

inline Registry registry_from_string(const std::string& text) {
  std::istringstream in(text);
  return Registry::load(in);
}

inline CompositionProblem make_problem(std::vector<ResourceSpec> initial, std::vector<ResourceSpec> goal, int horizon) {
  CompositionProblem p;
  p.initial = std::move(initial);
  p.goal = std::move(goal);
  p.horizon = horizon;
  return p;
}

// Problems small enough for the brute-force enumerator.
inline std::vector<std::pair<std::string, CompositionProblem>> small_problems() {
  ResourceSpec genes{"gene_names", "set_of_strings"};
  return {
      {"genes to species tree", make_problem({genes}, {{"species_tree", "newickTree"}}, 4)},
      {"genes to taxa", make_problem({genes}, {{"bio_taxa", "list_of_strings"}}, 4)},
      {"genes to scaled tree", make_problem({genes}, {{"scaled_gene_tree", "newickTree"}}, 3)},
      {"two goals", make_problem({genes}, {{"species_names", "list_of_strings"}, {"gene_tree", "newickTree"}}, 4)},
      {"two inputs",
       make_problem({{"raw_gene_tree", "newickTree"}, {"species_names", "list_of_strings"}},
                    {{"reconciliation_tree", "newickTree"}}, 4)},
      {"goal already held", make_problem({genes}, {{"names", "set_of_strings"}}, 2)},
  };
}

// Every workflow composed (exhaustively) for the small problems with at
// most `max_nodes` nodes, deduplicated, in canonical order.
inline std::vector<Workflow> small_workflows(std::size_t max_nodes) {
  std::vector<Workflow> out;
  std::set<std::string> seen;
  PlannerOptions o;
  o.exhaustive = true;
  for (const auto& [_, problem] : small_problems()) {
    for (auto& w : compose(phylo_registry(), problem, o).workflows)
      if (w.nodes.size() <= max_nodes && seen.insert(canonical_key(w)).second) out.push_back(std::move(w));
  }
  std::sort(out.begin(), out.end(), canonical_less);
  return out;
}

// One class "step" (thing -> thing) with services s1..sk carrying the given
// QoS vectors; used to rank hand-crafted candidates.
inline Registry qos_registry(const std::vector<QoSVector>& qos) {
  json services = json::array();
  for (std::size_t i = 0; i < qos.size(); ++i)
    services.push_back({{"name", "s" + std::to_string(i + 1)},
                        {"class", "step"},
                        {"input_formats", {{"x", "f"}}},
                        {"output_formats", {{"y", "f"}}},
                        {"qos", {{"rt", qos[i].rt}, {"tp", qos[i].tp}, {"av", qos[i].av}, {"re", qos[i].re}}},
                        {"description", ""}});
  json doc = {{"formats", {"f"}},
              {"resource_classes", {{{"name", "thing"}, {"parent", nullptr}}}},
              {"service_classes",
               {{{"name", "step"},
                 {"parent", nullptr},
                 {"inputs", {{{"port", "x"}, {"class", "thing"}}}},
                 {"outputs", {{{"port", "y"}, {"class", "thing"}}}},
                 {"description", ""}}}},
              {"services", services}};
  return Registry::from_json(doc);
}

// Nodes only, one per service in order; enough for QoS aggregation.
inline Workflow nodes_only(const std::vector<std::string>& services) {
  Workflow w;
  for (std::size_t i = 0; i < services.size(); ++i)
    w.nodes.push_back({"n" + std::to_string(i + 1), services[i], static_cast<int>(i + 1)});
  return w;
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::atomic<int> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("wfc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name, const std::string& content) const {
    auto p = path / name;
    std::ofstream(p) << content;
    return p.string();
  }
};

}  // namespace wfc::testing
