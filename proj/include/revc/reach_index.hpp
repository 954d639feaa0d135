#pragma once

#include <vector>

#include "revc/types.hpp"

namespace revc {

/// Edge added by preprocessing that bypasses a chain of degree-two
/// vertices. `cost` equals the summed cost of the bypassed original edges.
struct Shortcut {
  VertexId tail;
  VertexId head;
  Cost cost;
  std::vector<VertexId> bypassed;
};

/// Per-vertex reach upper bounds (valid for the original, shortcut-free
/// graph) plus length-capped shortcut edges used by point-to-point queries.
struct ReachIndex {
  std::vector<Cost> bound;
  std::vector<Shortcut> shortcuts;
  Cost cap = 0;

  // Shortcut ids grouped by tail / head; rebuilt by `link()`.
  std::vector<std::vector<std::size_t>> out_shortcuts;
  std::vector<std::vector<std::size_t>> in_shortcuts;

  /// All bounds infinite: disables every reach test.
  static ReachIndex unbounded(std::size_t num_vertices) {
    ReachIndex idx;
    idx.bound.assign(num_vertices, kInfCost);
    idx.link();
    return idx;
  }

  void link() {
    out_shortcuts.assign(bound.size(), {});
    in_shortcuts.assign(bound.size(), {});
    for (std::size_t i = 0; i < shortcuts.size(); ++i) {
      out_shortcuts[shortcuts[i].tail].push_back(i);
      in_shortcuts[shortcuts[i].head].push_back(i);
    }
  }
};

}  // namespace revc
