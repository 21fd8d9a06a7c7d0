#include "wfc/graph_edit_distance.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace wfc {

namespace {

// Node and edge labels are interned so bounds can count with flat arrays.
struct Labels {
  std::map<std::string, int> nodes;
  std::map<std::pair<std::string, std::string>, int> edges;

  int node(const std::string& s) { return nodes.emplace(s, static_cast<int>(nodes.size())).first->second; }
  int edge(const std::string& out, const std::string& in) {
    return edges.emplace(std::pair{out, in}, static_cast<int>(edges.size())).first->second;
  }
};

struct Graph {
  std::vector<int> labels;
  // edges[u][v]: sorted edge labels from u to v
  std::vector<std::vector<std::vector<int>>> edges;

  Graph(const Workflow& w, Labels& dict)
      : labels(w.nodes.size()), edges(w.nodes.size(), std::vector<std::vector<int>>(w.nodes.size())) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
      labels[i] = dict.node(w.nodes[i].service);
      index[w.nodes[i].id] = i;
    }
    for (const auto& e : w.edges) {
      auto s = index.find(e.src), d = index.find(e.dst);
      if (s == index.end() || d == index.end()) continue;
      edges[s->second][d->second].push_back(dict.edge(e.out_port, e.in_port));
    }
    for (auto& row : edges)
      for (auto& cell : row) std::sort(cell.begin(), cell.end());
  }

  std::size_t size() const { return labels.size(); }
};

// Cheapest unit-cost rewrite of one sorted label multiset into another.
int multiset_cost(const std::vector<int>& x, const std::vector<int>& y) {
  std::size_t common = 0, i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) ++i;
    else if (y[j] < x[i]) ++j;
    else {
      ++common;
      ++i;
      ++j;
    }
  }
  return static_cast<int>(std::max(x.size(), y.size()) - common);
}

constexpr std::size_t kDeleted = std::numeric_limits<std::size_t>::max();

class Matcher {
 public:
  Matcher(const Graph& a, const Graph& b, const Labels& dict)
      : a_(a),
        b_(b),
        map_(a.size(), kDeleted),
        used_(b.size(), false),
        node_count_(dict.nodes.size()),
        edge_count_(dict.edges.size()) {}

  // Cost of the complete mapping in map_.
  int total() const {
    int cost = 0;
    for (std::size_t u = 0; u < a_.size(); ++u) cost += node_cost(u, map_[u]) + edge_cost_with_earlier(u, map_[u]);
    std::vector<bool> hit(b_.size(), false);
    for (auto v : map_)
      if (v != kDeleted) hit[v] = true;
    cost += inserted_cost(hit);
    return cost;
  }

  int greedy() {
    for (std::size_t u = 0; u < a_.size(); ++u) {
      std::size_t best = kDeleted;
      int best_cost = node_cost(u, kDeleted) + edge_cost_with_earlier(u, kDeleted);
      for (std::size_t v = 0; v < b_.size(); ++v) {
        if (used_[v]) continue;
        int c = node_cost(u, v) + edge_cost_with_earlier(u, v);
        if (c < best_cost) {
          best_cost = c;
          best = v;
        }
      }
      map_[u] = best;
      if (best != kDeleted) used_[best] = true;
    }
    int cost = total();
    std::fill(map_.begin(), map_.end(), kDeleted);
    std::fill(used_.begin(), used_.end(), false);
    return cost;
  }

  int exact(int upper_bound) {
    best_ = upper_bound;
    search(0, 0);
    return best_;
  }

 private:
  int node_cost(std::size_t u, std::size_t v) const {
    if (v == kDeleted) return 1;
    return a_.labels[u] == b_.labels[v] ? 0 : 1;
  }

  // Edge cost between u (mapped to v) and every earlier a-node, both
  // directions, plus the self-loop of u.
  int edge_cost_with_earlier(std::size_t u, std::size_t v) const {
    int cost = 0;
    auto pair_cost = [&](std::size_t x, std::size_t y) {
      const auto& la = a_.edges[x][y];
      const std::size_t mx = x == u ? v : map_[x];
      const std::size_t my = y == u ? v : map_[y];
      if (mx == kDeleted || my == kDeleted) return static_cast<int>(la.size());
      return multiset_cost(la, b_.edges[mx][my]);
    };
    for (std::size_t w = 0; w < u; ++w) cost += pair_cost(u, w) + pair_cost(w, u);
    cost += pair_cost(u, u);
    return cost;
  }

  // b-nodes left unmapped are inserted along with every edge touching them.
  int inserted_cost(const std::vector<bool>& hit) const {
    int cost = 0;
    for (std::size_t x = 0; x < b_.size(); ++x) {
      if (!hit[x]) ++cost;
      for (std::size_t y = 0; y < b_.size(); ++y)
        if (!hit[x] || !hit[y]) cost += static_cast<int>(b_.edges[x][y].size());
    }
    return cost;
  }

  // max(|X|, |Y|) minus the common labels; `count` holds X's label counts.
  static int bag_bound(std::vector<int>& count, int nx, const std::vector<int>& ys) {
    int common = 0;
    for (int y : ys)
      if (count[y] > 0) {
        --count[y];
        ++common;
      }
    return std::max(nx, static_cast<int>(ys.size())) - common;
  }

  // Lower bound for what is still unpaid: labels of the a-nodes from `u` on
  // against the unused b-nodes, and a-edges touching them against b-edges
  // touching an unused b-node. Only those can still be matched to each other.
  int remaining_bound(std::size_t u) {
    std::fill(node_scratch_.begin(), node_scratch_.end(), 0);
    node_scratch_.resize(node_count_, 0);
    int na = 0;
    for (std::size_t x = u; x < a_.size(); ++x, ++na) ++node_scratch_[a_.labels[x]];
    ys_.clear();
    for (std::size_t y = 0; y < b_.size(); ++y)
      if (!used_[y]) ys_.push_back(b_.labels[y]);
    const int nodes = bag_bound(node_scratch_, na, ys_);

    std::fill(edge_scratch_.begin(), edge_scratch_.end(), 0);
    edge_scratch_.resize(edge_count_, 0);
    int ea = 0;
    for (std::size_t x = 0; x < a_.size(); ++x)
      for (std::size_t y = 0; y < a_.size(); ++y)
        if (x >= u || y >= u)
          for (int l : a_.edges[x][y]) {
            ++edge_scratch_[l];
            ++ea;
          }
    ys_.clear();
    for (std::size_t x = 0; x < b_.size(); ++x)
      for (std::size_t y = 0; y < b_.size(); ++y)
        if (!used_[x] || !used_[y]) ys_.insert(ys_.end(), b_.edges[x][y].begin(), b_.edges[x][y].end());
    return nodes + bag_bound(edge_scratch_, ea, ys_);
  }

  void search(std::size_t u, int cost) {
    if (cost + remaining_bound(u) >= best_) return;
    if (u == a_.size()) {
      best_ = std::min(best_, cost + inserted_cost(used_));
      return;
    }
    // Try matching labels first so good bounds show up early.
    std::vector<std::size_t> order;
    for (std::size_t v = 0; v < b_.size(); ++v)
      if (!used_[v] && b_.labels[v] == a_.labels[u]) order.push_back(v);
    for (std::size_t v = 0; v < b_.size(); ++v)
      if (!used_[v] && b_.labels[v] != a_.labels[u]) order.push_back(v);
    order.push_back(kDeleted);
    for (auto v : order) {
      int step = node_cost(u, v) + edge_cost_with_earlier(u, v);
      map_[u] = v;
      if (v != kDeleted) used_[v] = true;
      search(u + 1, cost + step);
      if (v != kDeleted) used_[v] = false;
      map_[u] = kDeleted;
    }
  }

  const Graph& a_;
  const Graph& b_;
  std::vector<std::size_t> map_;
  std::vector<bool> used_;
  std::size_t node_count_;
  std::size_t edge_count_;
  std::vector<int> node_scratch_, edge_scratch_, ys_;
  int best_ = 0;
};

}  // namespace

EditDistance graph_edit_distance(const Workflow& a, const Workflow& b, std::size_t exact_limit) {
  Labels dict;
  Graph ga(a, dict), gb(b, dict);
  Matcher forward(ga, gb, dict), backward(gb, ga, dict);
  const int greedy = std::min(forward.greedy(), backward.greedy());
  if (ga.size() > exact_limit || gb.size() > exact_limit) return {greedy, false};
  // The bound is strict, so start one above the greedy value.
  return {forward.exact(greedy + 1), true};
}

}  // namespace wfc
