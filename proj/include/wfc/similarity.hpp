#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wfc/graph_edit_distance.hpp"
#include "wfc/registry.hpp"
#include "wfc/tfidf.hpp"
#include "wfc/workflow.hpp"

namespace wfc {

struct NodeSimWeights {
  double onto = 0.6;
  double inp = 0.15;
  double oup = 0.15;
  double des = 0.1;
};

struct EdgeSimWeights {
  double node = 0.5;
  double label = 0.5;
};

struct WorkflowSimWeights {
  double no = 0.45;
  double ed = 0.35;
  double to = 0.2;
};

struct SimilarityWeights {
  NodeSimWeights node;
  EdgeSimWeights edge;
  WorkflowSimWeights workflow;
};

// Throws IntegrityError unless each group lies in [0,1] and sums to 1.
void check_weights(const SimilarityWeights& w);
// Partial override: {"node": {"onto": ..}, "edge": {..}, "workflow": {"no": ..}}.
SimilarityWeights similarity_weights_from_json(const json& j, SimilarityWeights base = {});
json similarity_weights_to_json(const SimilarityWeights& w);

struct SimilarityReport {
  double node_level = 0.0;
  double edge_level = 0.0;
  double topo_level = 0.0;
  double combined = 0.0;
  EditDistance edit;
  std::vector<std::string> rows;  // node ids of the first workflow
  std::vector<std::string> cols;  // node ids of the second
  std::vector<std::vector<double>> node_matrix;
  SimilarityWeights weights;
};

json similarity_report_to_json(const SimilarityReport& r);
SimilarityReport similarity_report_from_json(const json& j);

// Dice coefficient of two sets of names; 1 when both are empty.
double dice(const std::vector<std::string>& a, const std::vector<std::string>& b);

// Similarity measures over one registry. Concrete services count as leaf
// children of their class in the service taxonomy. Node arguments are
// concrete service names.
class SimilarityEngine {
 public:
  explicit SimilarityEngine(const Registry& registry, SimilarityWeights weights = {});

  const Registry& registry() const { return registry_; }
  const SimilarityWeights& weights() const { return weights_; }
  const TfIdfModel& tfidf() const { return tfidf_; }

  double sim_nodes_onto(const std::string& s1, const std::string& s2) const;
  double sim_nodes_inp(const std::string& s1, const std::string& s2) const;
  double sim_nodes_oup(const std::string& s1, const std::string& s2) const;
  double sim_nodes_des(const std::string& s1, const std::string& s2) const;
  double sim_nodes(const std::string& s1, const std::string& s2) const;

  // Edges are looked up in their own workflows to resolve node services
  // and port classes.
  double sim_ed_nod(const Workflow& g1, const WorkflowEdge& e1, const Workflow& g2, const WorkflowEdge& e2) const;
  double sim_ed_re(const Workflow& g1, const WorkflowEdge& e1, const Workflow& g2, const WorkflowEdge& e2) const;
  double sim_edges(const Workflow& g1, const WorkflowEdge& e1, const Workflow& g2, const WorkflowEdge& e2) const;

  // 1 / (1 + d) over resource classes, 0 without a common ancestor.
  double resource_label_similarity(const std::string& out1, const std::string& in1, const std::string& out2,
                                   const std::string& in2) const;

  // 2 * sum over all node pairs / (|V1| + |V2|), not clamped.
  // Throws EmptyInputError when both workflows are empty.
  double sim_nodes_workflows(const Workflow& g1, const Workflow& g2) const;
  // Same shape over edges; 1 when both edge sets are empty, 0 when one is.
  double sim_edges_workflows(const Workflow& g1, const Workflow& g2) const;
  EditDistance dist_topo(const Workflow& g1, const Workflow& g2) const;
  double sim_topo(const Workflow& g1, const Workflow& g2) const;

  SimilarityReport sim_workflows(const Workflow& g1, const Workflow& g2) const;

  std::size_t exact_ged_limit = 12;

 private:
  const ConcreteService& service(const std::string& name) const;
  std::string port_class(const Workflow& g, const std::string& node, const std::string& port, bool output) const;

  const Registry& registry_;
  SimilarityWeights weights_;
  TfIdfModel tfidf_;
  std::map<std::string, TermVector> description_vectors_;
  std::map<std::string, std::size_t> service_index_;
  std::vector<double> node_table_;  // sim_nodes for every service pair, row-major
};

}  // namespace wfc
