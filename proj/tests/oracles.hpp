#pragma once

// Brute-force reference computations. None of these call into the code
// paths they are used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "wfc/planner.hpp"
#include "wfc/replanner.hpp"
#include "wfc/registry.hpp"
#include "wfc/workflow.hpp"

namespace wfc::oracle {

// Every class sequence of length <= horizon, every binding of every input to
// an earlier resource of a compatible class, every goal binding; kept when
// the replay checker accepts it.
inline std::vector<AbstractPlan> enumerate_plans(const Registry& registry, const CompositionProblem& problem,
                                                 const std::set<std::string>& excluded = {}) {
  const auto classes = plannable_classes(registry, excluded);
  const auto& tax = registry.resource_taxonomy();
  std::vector<AbstractPlan> out;

  struct Res {
    ResourceRef ref;
    std::string cls;
  };

  std::function<void(std::vector<std::string>&, int)> sequences;
  auto try_sequence = [&](const std::vector<std::string>& seq) {
    std::vector<Res> all;
    for (std::size_t i = 0; i < problem.initial.size(); ++i) all.push_back({{0, i}, problem.initial[i].resource});
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const auto& c = registry.service_class(seq[t]);
      for (std::size_t k = 0; k < c.outputs.size(); ++k)
        all.push_back({{static_cast<int>(t + 1), k}, c.outputs[k].resource_class});
    }
    // Slots: every input of every step, then every goal.
    std::vector<std::vector<ResourceRef>> slot_options;
    std::vector<Binding> slot_binding;
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const auto& c = registry.service_class(seq[t]);
      for (std::size_t i = 0; i < c.inputs.size(); ++i) {
        std::vector<ResourceRef> opts;
        for (const auto& r : all)
          if (r.ref.step <= static_cast<int>(t) && tax.is_subclass(r.cls, c.inputs[i].resource_class)) opts.push_back(r.ref);
        slot_options.push_back(opts);
        slot_binding.push_back({static_cast<int>(t + 1), i, {}});
      }
    }
    const std::size_t n_inputs = slot_options.size();
    for (const auto& g : problem.goal) {
      std::vector<ResourceRef> opts;
      for (const auto& r : all)
        if (tax.is_subclass(r.cls, g.resource)) opts.push_back(r.ref);
      slot_options.push_back(opts);
    }
    std::vector<ResourceRef> pick(slot_options.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == slot_options.size()) {
        AbstractPlan p;
        p.steps = seq;
        for (std::size_t s = 0; s < n_inputs; ++s) {
          Binding b = slot_binding[s];
          b.producer = pick[s];
          p.bindings.push_back(b);
        }
        p.goal_bindings.assign(pick.begin() + static_cast<std::ptrdiff_t>(n_inputs), pick.end());
        if (replay_plan(registry, problem, p).empty()) out.push_back(std::move(p));
        return;
      }
      for (const auto& r : slot_options[k]) {
        pick[k] = r;
        rec(k + 1);
      }
    };
    rec(0);
  };
  sequences = [&](std::vector<std::string>& seq, int left) {
    try_sequence(seq);
    if (left == 0) return;
    for (const auto& c : classes) {
      seq.push_back(c);
      sequences(seq, left - 1);
      seq.pop_back();
    }
  };
  std::vector<std::string> seq;
  sequences(seq, problem.horizon);
  std::sort(out.begin(), out.end());
  return out;
}

// Graph edit distance by exhaustive search over every partial injective
// node mapping, with costs recomputed from scratch for each mapping.
inline int exhaustive_ged(const Workflow& a, const Workflow& b) {
  const std::size_t n = a.nodes.size(), m = b.nodes.size();
  auto index = [](const Workflow& w) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) idx[w.nodes[i].id] = i;
    return idx;
  };
  auto ia = index(a), ib = index(b);
  using Label = std::pair<std::string, std::string>;
  std::multimap<std::pair<std::size_t, std::size_t>, Label> ea, eb;
  for (const auto& e : a.edges) ea.insert({{ia[e.src], ia[e.dst]}, {e.out_port, e.in_port}});
  for (const auto& e : b.edges) eb.insert({{ib[e.src], ib[e.dst]}, {e.out_port, e.in_port}});

  auto matrix = [](const std::multimap<std::pair<std::size_t, std::size_t>, Label>& edges, std::size_t k) {
    std::vector<std::vector<std::vector<Label>>> out(k, std::vector<std::vector<Label>>(k));
    for (const auto& [key, label] : edges) out[key.first][key.second].push_back(label);
    for (auto& row : out)
      for (auto& cell : row) std::sort(cell.begin(), cell.end());
    return out;
  };
  const auto la_all = matrix(ea, n), lb_all = matrix(eb, m);
  auto labels = [&](int which, std::size_t u, std::size_t v) -> const std::vector<Label>& {
    return which == 0 ? la_all[u][v] : lb_all[u][v];
  };

  // Cost of turning label list x into y with unit substitute/insert/delete,
  // by brute force over all matchings.
  std::function<int(const std::vector<Label>&, const std::vector<Label>&)> match_cost =
      [&](const std::vector<Label>& x, const std::vector<Label>& y) -> int {
    if (x.empty()) return static_cast<int>(y.size());
    if (y.empty()) return static_cast<int>(x.size());
    std::vector<Label> xs(x.begin(), x.end() - 1);
    const Label& head = x.back();
    int best = 1 + match_cost(xs, y);  // delete head
    for (std::size_t j = 0; j < y.size(); ++j) {
      auto rest = y;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
      best = std::min(best, (head == y[j] ? 0 : 1) + match_cost(xs, rest));
    }
    return best;
  };

  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> map(n, none);
  std::vector<bool> used(m, false);
  int best = std::numeric_limits<int>::max();

  auto total = [&]() {
    int cost = 0;
    for (std::size_t u = 0; u < n; ++u) {
      if (map[u] == none) ++cost;
      else if (a.nodes[u].service != b.nodes[map[u]].service) ++cost;
    }
    for (std::size_t v = 0; v < m; ++v)
      if (!used[v]) ++cost;
    std::set<std::pair<std::size_t, std::size_t>> covered_b;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        const auto& la = labels(0, u, v);
        if (map[u] == none || map[v] == none) {
          cost += static_cast<int>(la.size());
          continue;
        }
        covered_b.insert({map[u], map[v]});
        cost += match_cost(la, labels(1, map[u], map[v]));
      }
    }
    for (const auto& [key, _] : eb)
      if (!covered_b.count(key)) ++cost;
    return cost;
  };

  std::function<void(std::size_t)> rec = [&](std::size_t u) {
    if (u == n) {
      best = std::min(best, total());
      return;
    }
    map[u] = none;
    rec(u + 1);
    for (std::size_t v = 0; v < m; ++v) {
      if (used[v]) continue;
      used[v] = true;
      map[u] = v;
      rec(u + 1);
      map[u] = none;
      used[v] = false;
    }
  };
  rec(0);
  return best;
}

// Ancestor chain starting at `name` itself, following parent links.
template <typename Lookup>
std::vector<std::string> chain_of(const std::string& name, Lookup parent_of) {
  std::vector<std::string> out{name};
  for (auto p = parent_of(name); p; p = parent_of(*p)) out.push_back(*p);
  return out;
}

// Hops to the nearest shared ancestor along two chains, or -1.
inline int chain_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (a[i] == b[j]) return static_cast<int>(i + j);
  return -1;
}

inline std::vector<std::string> service_chain(const Registry& r, const std::string& service) {
  auto up = [&](const std::string& c) { return r.find_service_class(c)->parent; };
  auto out = chain_of(r.find_service(service)->service_class, up);
  out.insert(out.begin(), service);
  return out;
}

inline std::vector<std::string> resource_chain(const Registry& r, const std::string& cls) {
  return chain_of(cls, [&](const std::string& c) -> std::optional<std::string> {
    for (const auto& rc : r.resource_classes())
      if (rc.name == c) return rc.parent;
    return std::nullopt;
  });
}

inline double onto(const Registry& r, const std::string& s1, const std::string& s2) {
  int d = chain_distance(service_chain(r, s1), service_chain(r, s2));
  return d < 0 ? 0.0 : 1.0 / (1.0 + d);
}

inline double dice_of_ports(const std::vector<Port>& a, const std::vector<Port>& b) {
  std::set<std::string> x, y;
  for (const auto& p : a) x.insert(p.resource_class);
  for (const auto& p : b) y.insert(p.resource_class);
  if (x.empty() && y.empty()) return 1.0;
  int common = 0;
  for (const auto& c : x)
    if (y.count(c)) ++common;
  return 2.0 * common / static_cast<double>(x.size() + y.size());
}

inline std::map<std::string, int> term_counts(const std::string& text) {
  std::string lower;
  for (char c : text) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::map<std::string, int> out;
  static const std::regex word("[a-z0-9]+");
  for (auto it = std::sregex_iterator(lower.begin(), lower.end(), word); it != std::sregex_iterator(); ++it)
    ++out[it->str()];
  return out;
}

inline double description(const Registry& r, const std::string& s1, const std::string& s2) {
  std::vector<std::map<std::string, int>> corpus;
  for (const auto& s : r.services()) corpus.push_back(term_counts(s.description));
  auto weigh = [&](const std::map<std::string, int>& tf) {
    std::map<std::string, double> v;
    for (const auto& [t, n] : tf) {
      int df = 0;
      for (const auto& doc : corpus) df += doc.count(t) ? 1 : 0;
      v[t] = n * (std::log((1.0 + corpus.size()) / (1.0 + df)) + 1.0);
    }
    return v;
  };
  auto a = weigh(term_counts(r.find_service(s1)->description));
  auto b = weigh(term_counts(r.find_service(s2)->description));
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, w] : a) {
    na += w * w;
    if (b.count(t)) dot += w * b.at(t);
  }
  for (const auto& [t, w] : b) nb += w * w;
  return dot / std::sqrt(na * nb);
}

// Default node weights 0.6 / 0.15 / 0.15 / 0.1.
inline double node_uncached(const Registry& r, const std::string& s1, const std::string& s2) {
  const auto& c1 = *r.find_service_class(r.find_service(s1)->service_class);
  const auto& c2 = *r.find_service_class(r.find_service(s2)->service_class);
  return 0.6 * onto(r, s1, s2) + 0.15 * dice_of_ports(c1.inputs, c2.inputs) +
         0.15 * dice_of_ports(c1.outputs, c2.outputs) + 0.1 * description(r, s1, s2);
}

inline double node(const Registry& r, const std::string& s1, const std::string& s2) {
  static std::map<std::tuple<const Registry*, std::string, std::string>, double> memo;
  auto key = std::make_tuple(&r, s1, s2);
  auto it = memo.find(key);
  if (it == memo.end()) it = memo.emplace(key, node_uncached(r, s1, s2)).first;
  return it->second;
}

inline double node_level(const Registry& r, const Workflow& a, const Workflow& b) {
  double sum = 0;
  for (const auto& x : a.nodes)
    for (const auto& y : b.nodes) sum += node(r, x.service, y.service);
  return 2 * sum / static_cast<double>(a.nodes.size() + b.nodes.size());
}

inline std::string port_resource(const Registry& r, const Workflow& w, const std::string& id, const std::string& port) {
  for (const auto& n : w.nodes) {
    if (n.id != id) continue;
    const auto& cls = *r.find_service_class(r.find_service(n.service)->service_class);
    for (const auto& p : cls.inputs)
      if (p.name == port) return p.resource_class;
    for (const auto& p : cls.outputs)
      if (p.name == port) return p.resource_class;
  }
  return {};
}

inline std::string service_at(const Workflow& w, const std::string& id) {
  for (const auto& n : w.nodes)
    if (n.id == id) return n.service;
  return {};
}

// Default edge weights 0.5 / 0.5.
inline double edge(const Registry& r, const Workflow& a, const WorkflowEdge& e1, const Workflow& b, const WorkflowEdge& e2) {
  double nod = 0.5 * (node(r, service_at(a, e1.src), service_at(b, e2.src)) + node(r, service_at(a, e1.dst), service_at(b, e2.dst)));
  int d_out = chain_distance(resource_chain(r, port_resource(r, a, e1.src, e1.out_port)),
                             resource_chain(r, port_resource(r, b, e2.src, e2.out_port)));
  int d_in = chain_distance(resource_chain(r, port_resource(r, a, e1.dst, e1.in_port)),
                            resource_chain(r, port_resource(r, b, e2.dst, e2.in_port)));
  double re = (d_out < 0 || d_in < 0) ? 0.0 : 1.0 / (1.0 + 0.5 * (d_out + d_in));
  return 0.5 * nod + 0.5 * re;
}

inline double edge_level(const Registry& r, const Workflow& a, const Workflow& b) {
  if (a.edges.empty() && b.edges.empty()) return 1.0;
  if (a.edges.empty() || b.edges.empty()) return 0.0;
  double sum = 0;
  for (const auto& x : a.edges)
    for (const auto& y : b.edges) sum += edge(r, a, x, b, y);
  return 2 * sum / static_cast<double>(a.edges.size() + b.edges.size());
}

// Request semantics read straight off the taxonomy chains: a target matches
// a node when it names the service or any class above it.
inline bool uses(const Registry& r, const Workflow& w, const std::string& target) {
  return std::any_of(w.nodes.begin(), w.nodes.end(), [&](const WorkflowNode& n) {
    auto chain = service_chain(r, n.service);
    return std::find(chain.begin(), chain.end(), target) != chain.end();
  });
}

inline bool satisfies(const Registry& r, const Workflow& w, const RequestSet& requests) {
  using Kind = RefinementRequest::Kind;
  auto included = [&](const std::string& t) {
    for (const auto& q : requests)
      if (q.kind == Kind::include && q.target == t) return true;
    return false;
  };
  for (const auto& q : requests) {
    if (q.kind == Kind::avoid && uses(r, w, q.target)) return false;
    if (q.kind == Kind::include && !uses(r, w, q.target)) return false;
    if (q.kind == Kind::change_io) {
      if (q.initial && w.initial != *q.initial) return false;
      if (q.goal && w.goal != *q.goal) return false;
    }
    if (q.kind == Kind::order_before) {
      bool found_x = uses(r, w, q.first), found_y = uses(r, w, q.second);
      if (!found_x || !found_y) {
        if ((!found_x && included(q.first)) || (!found_y && included(q.second))) return false;
        continue;
      }
      bool ok = false;
      for (const auto& a : w.nodes)
        for (const auto& b : w.nodes) {
          auto ca = service_chain(r, a.service), cb = service_chain(r, b.service);
          if (std::count(ca.begin(), ca.end(), q.first) && std::count(cb.begin(), cb.end(), q.second) && a.step < b.step)
            ok = true;
        }
      if (!ok) return false;
    }
  }
  return true;
}

}  // namespace wfc::oracle
