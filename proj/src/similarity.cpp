#include "wfc/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace wfc {

namespace {

std::vector<std::string> port_classes(const std::vector<Port>& ports) {
  std::vector<std::string> out;
  for (const auto& p : ports) out.push_back(p.resource_class);
  return out;
}

std::vector<std::string> descriptions(const Registry& registry) {
  std::vector<std::string> out;
  for (const auto& s : registry.services()) out.push_back(s.description);
  return out;
}

// Sorting first makes the sum independent of argument order.
double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

void check_group(const std::string& name, std::initializer_list<double> values) {
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw IntegrityError(name, name + " weights must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw IntegrityError(name, name + " weights must sum to 1");
}

void read_weight(const json& j, const char* key, double& into) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_number()) throw ParseError(std::string("weight '") + key + "' must be a number");
  into = j.at(key).get<double>();
}

void check_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + " weights must be an object");
  for (const auto& [k, _] : j.items())
    if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; }))
      throw ParseError("unknown " + where + " weight '" + k + "'");
}

}  // namespace

void check_weights(const SimilarityWeights& w) {
  check_group("node", {w.node.onto, w.node.inp, w.node.oup, w.node.des});
  check_group("edge", {w.edge.node, w.edge.label});
  check_group("workflow", {w.workflow.no, w.workflow.ed, w.workflow.to});
}

SimilarityWeights similarity_weights_from_json(const json& j, SimilarityWeights base) {
  check_keys(j, {"node", "edge", "workflow"}, "similarity");
  if (j.contains("node")) {
    const auto& n = j.at("node");
    check_keys(n, {"onto", "inp", "oup", "des"}, "node");
    read_weight(n, "onto", base.node.onto);
    read_weight(n, "inp", base.node.inp);
    read_weight(n, "oup", base.node.oup);
    read_weight(n, "des", base.node.des);
  }
  if (j.contains("edge")) {
    const auto& e = j.at("edge");
    check_keys(e, {"node", "label"}, "edge");
    read_weight(e, "node", base.edge.node);
    read_weight(e, "label", base.edge.label);
  }
  if (j.contains("workflow")) {
    const auto& w = j.at("workflow");
    check_keys(w, {"no", "ed", "to"}, "workflow");
    read_weight(w, "no", base.workflow.no);
    read_weight(w, "ed", base.workflow.ed);
    read_weight(w, "to", base.workflow.to);
  }
  check_weights(base);
  return base;
}

json similarity_weights_to_json(const SimilarityWeights& w) {
  return {{"node", {{"onto", w.node.onto}, {"inp", w.node.inp}, {"oup", w.node.oup}, {"des", w.node.des}}},
          {"edge", {{"node", w.edge.node}, {"label", w.edge.label}}},
          {"workflow", {{"no", w.workflow.no}, {"ed", w.workflow.ed}, {"to", w.workflow.to}}}};
}

json similarity_report_to_json(const SimilarityReport& r) {
  return {{"node_level", r.node_level},
          {"edge_level", r.edge_level},
          {"topo_level", r.topo_level},
          {"combined", r.combined},
          {"edit_distance", r.edit.distance},
          {"edit_distance_exact", r.edit.exact},
          {"node_matrix", {{"rows", r.rows}, {"cols", r.cols}, {"values", r.node_matrix}}},
          {"weights", similarity_weights_to_json(r.weights)}};
}

SimilarityReport similarity_report_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("similarity report must be an object");
  auto number = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(std::string("similarity.") + key + " must be a number");
    return j.at(key).get<double>();
  };
  SimilarityReport r;
  r.node_level = number("node_level");
  r.edge_level = number("edge_level");
  r.topo_level = number("topo_level");
  r.combined = number("combined");
  r.edit.distance = static_cast<int>(number("edit_distance"));
  if (!j.contains("edit_distance_exact") || !j.at("edit_distance_exact").is_boolean())
    throw ParseError("similarity.edit_distance_exact must be a boolean");
  r.edit.exact = j.at("edit_distance_exact").get<bool>();
  try {
    const auto& m = j.at("node_matrix");
    r.rows = m.at("rows").get<std::vector<std::string>>();
    r.cols = m.at("cols").get<std::vector<std::string>>();
    r.node_matrix = m.at("values").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("similarity.node_matrix: ") + e.what());
  }
  if (r.node_matrix.size() != r.rows.size() ||
      std::any_of(r.node_matrix.begin(), r.node_matrix.end(), [&](const auto& row) { return row.size() != r.cols.size(); }))
    throw ParseError("similarity.node_matrix does not match its rows and columns");
  r.weights = similarity_weights_from_json(j.value("weights", json::object()));
  return r;
}

double dice(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& x : sa) common += sb.count(x);
  return 2.0 * static_cast<double>(common) / static_cast<double>(sa.size() + sb.size());
}

SimilarityEngine::SimilarityEngine(const Registry& registry, SimilarityWeights weights)
    : registry_(registry), weights_(weights), tfidf_(descriptions(registry)) {
  check_weights(weights_);
  for (const auto& s : registry.services()) description_vectors_[s.name] = tfidf_.vectorize(s.description);
  const auto& services = registry.services();
  const std::size_t n = services.size();
  for (std::size_t i = 0; i < n; ++i) service_index_[services[i].name] = i;
  node_table_.resize(n * n);
  const auto& w = weights_.node;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto& a = services[i].name;
      const auto& b = services[j].name;
      node_table_[i * n + j] = w.onto * sim_nodes_onto(a, b) + w.inp * sim_nodes_inp(a, b) +
                               w.oup * sim_nodes_oup(a, b) + w.des * sim_nodes_des(a, b);
    }
}

const ConcreteService& SimilarityEngine::service(const std::string& name) const { return registry_.service(name); }

double SimilarityEngine::sim_nodes_onto(const std::string& s1, const std::string& s2) const {
  const auto& a = service(s1);
  const auto& b = service(s2);
  if (a.name == b.name) return 1.0;
  const auto& tax = registry_.service_taxonomy();
  auto common = tax.lca(a.service_class, b.service_class);
  if (!common) return 0.0;
  // one extra hop on each side from the service to its class
  const int d = tax.path_len(a.service_class, *common) + 1 + tax.path_len(b.service_class, *common) + 1;
  return 1.0 / (1.0 + d);
}

double SimilarityEngine::sim_nodes_inp(const std::string& s1, const std::string& s2) const {
  return dice(port_classes(registry_.class_of(service(s1)).inputs), port_classes(registry_.class_of(service(s2)).inputs));
}

double SimilarityEngine::sim_nodes_oup(const std::string& s1, const std::string& s2) const {
  return dice(port_classes(registry_.class_of(service(s1)).outputs), port_classes(registry_.class_of(service(s2)).outputs));
}

double SimilarityEngine::sim_nodes_des(const std::string& s1, const std::string& s2) const {
  service(s1);
  service(s2);
  return TfIdfModel::cosine(description_vectors_.at(s1), description_vectors_.at(s2));
}

double SimilarityEngine::sim_nodes(const std::string& s1, const std::string& s2) const {
  auto i = service_index_.find(s1), j = service_index_.find(s2);
  if (i == service_index_.end()) throw UnknownNameError(s1);
  if (j == service_index_.end()) throw UnknownNameError(s2);
  return node_table_[i->second * service_index_.size() + j->second];
}

std::string SimilarityEngine::port_class(const Workflow& g, const std::string& node, const std::string& port,
                                         bool output) const {
  const auto* n = g.find_node(node);
  if (!n) throw IntegrityError(node, "edge references missing node " + node);
  const auto& cls = registry_.class_of(service(n->service));
  for (const auto& p : output ? cls.outputs : cls.inputs)
    if (p.name == port) return p.resource_class;
  throw IntegrityError(port, "service " + n->service + " has no port " + port);
}

double SimilarityEngine::sim_ed_nod(const Workflow& g1, const WorkflowEdge& e1, const Workflow& g2,
                                    const WorkflowEdge& e2) const {
  auto svc = [](const Workflow& g, const std::string& id) -> const std::string& {
    const auto* n = g.find_node(id);
    if (!n) throw IntegrityError(id, "edge references missing node " + id);
    return n->service;
  };
  return 0.5 * (sim_nodes(svc(g1, e1.src), svc(g2, e2.src)) + sim_nodes(svc(g1, e1.dst), svc(g2, e2.dst)));
}

double SimilarityEngine::resource_label_similarity(const std::string& out1, const std::string& in1,
                                                   const std::string& out2, const std::string& in2) const {
  const auto& tax = registry_.resource_taxonomy();
  auto distance = [&](const std::string& x, const std::string& y) -> std::optional<int> {
    auto common = tax.lca(x, y);
    if (!common) return std::nullopt;
    return tax.path_len(x, *common) + tax.path_len(y, *common);
  };
  auto d_out = distance(out1, out2);
  auto d_in = distance(in1, in2);
  if (!d_out || !d_in) return 0.0;
  return 1.0 / (1.0 + 0.5 * (*d_out + *d_in));
}

double SimilarityEngine::sim_ed_re(const Workflow& g1, const WorkflowEdge& e1, const Workflow& g2,
                                   const WorkflowEdge& e2) const {
  return resource_label_similarity(port_class(g1, e1.src, e1.out_port, true), port_class(g1, e1.dst, e1.in_port, false),
                                   port_class(g2, e2.src, e2.out_port, true), port_class(g2, e2.dst, e2.in_port, false));
}

double SimilarityEngine::sim_edges(const Workflow& g1, const WorkflowEdge& e1, const Workflow& g2,
                                   const WorkflowEdge& e2) const {
  return weights_.edge.node * sim_ed_nod(g1, e1, g2, e2) + weights_.edge.label * sim_ed_re(g1, e1, g2, e2);
}

double SimilarityEngine::sim_nodes_workflows(const Workflow& g1, const Workflow& g2) const {
  const std::size_t n = g1.nodes.size() + g2.nodes.size();
  if (n == 0) throw EmptyInputError("node similarity of two empty workflows is undefined");
  std::vector<double> pairs;
  pairs.reserve(g1.nodes.size() * g2.nodes.size());
  for (const auto& a : g1.nodes)
    for (const auto& b : g2.nodes) pairs.push_back(sim_nodes(a.service, b.service));
  return 2.0 * sorted_sum(std::move(pairs)) / static_cast<double>(n);
}

double SimilarityEngine::sim_edges_workflows(const Workflow& g1, const Workflow& g2) const {
  if (g1.edges.empty() && g2.edges.empty()) return 1.0;
  if (g1.edges.empty() || g2.edges.empty()) return 0.0;
  std::vector<double> pairs;
  pairs.reserve(g1.edges.size() * g2.edges.size());
  for (const auto& a : g1.edges)
    for (const auto& b : g2.edges) pairs.push_back(sim_edges(g1, a, g2, b));
  return 2.0 * sorted_sum(std::move(pairs)) / static_cast<double>(g1.edges.size() + g2.edges.size());
}

EditDistance SimilarityEngine::dist_topo(const Workflow& g1, const Workflow& g2) const {
  return graph_edit_distance(g1, g2, exact_ged_limit);
}

double SimilarityEngine::sim_topo(const Workflow& g1, const Workflow& g2) const {
  return 1.0 / (1.0 + dist_topo(g1, g2).distance);
}

SimilarityReport SimilarityEngine::sim_workflows(const Workflow& g1, const Workflow& g2) const {
  SimilarityReport r;
  r.weights = weights_;
  for (const auto& n : g1.nodes) r.rows.push_back(n.id);
  for (const auto& n : g2.nodes) r.cols.push_back(n.id);
  for (const auto& a : g1.nodes) {
    std::vector<double> row;
    for (const auto& b : g2.nodes) row.push_back(sim_nodes(a.service, b.service));
    r.node_matrix.push_back(std::move(row));
  }
  r.node_level = sim_nodes_workflows(g1, g2);
  r.edge_level = sim_edges_workflows(g1, g2);
  r.edit = dist_topo(g1, g2);
  r.topo_level = 1.0 / (1.0 + r.edit.distance);
  const auto& w = weights_.workflow;
  r.combined = w.no * r.node_level + w.ed * r.edge_level + w.to * r.topo_level;
  return r;
}

}  // namespace wfc
