#pragma once

#include <cstddef>

#include "wfc/workflow.hpp"

namespace wfc {

struct EditDistance {
  int distance = 0;
  bool exact = true;  // false when the greedy upper bound was used
};

// Unit-cost graph edit distance between two workflows. Nodes are labelled
// by concrete service, edges by (out_port, in_port). Exact by branch and
// bound while both graphs have at most `exact_limit` nodes, otherwise the
// better of two greedy mappings.
EditDistance graph_edit_distance(const Workflow& a, const Workflow& b, std::size_t exact_limit = 12);

}  // namespace wfc
