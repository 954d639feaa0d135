#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "revc/graph.hpp"
#include "revc/reach_index.hpp"

namespace revc {

/// Dense shortest-path tree. `cost[v]` is d(root, v) for forward trees and
/// d(v, root) for backward trees; unreached vertices hold kInfCost.
struct SpTree {
  VertexId root = kNoVertex;
  Direction direction = Direction::kForward;
  Cost height_bound = kInfCost;
  std::vector<Cost> cost;
  std::vector<VertexId> parent;
  std::vector<EdgeId> parent_edge;
  std::vector<char> scanned;

  bool is_scanned(VertexId v) const { return scanned[v] != 0; }

  /// Vertices from `v` up to the root, inclusive ({} if v is not scanned).
  std::vector<VertexId> chain_to_root(VertexId v) const;
};

/// Min-heap entry ordered by (cost, vertex id); ties go to the smaller id.
struct HeapEntry {
  Cost cost;
  VertexId vertex;
  friend bool operator>(const HeapEntry& a, const HeapEntry& b) {
    return a.cost != b.cost ? a.cost > b.cost : a.vertex > b.vertex;
  }
};
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

/// Plain Dijkstra over forward (kForward) or reverse (kBackward) adjacency.
/// Stops once the smallest key in the container exceeds `height_bound`.
SpTree dijkstra_tree(const Graph& g, VertexId root, Direction direction, Cost height_bound = kInfCost);

struct QueryStats {
  std::uint64_t queries = 0;
  std::uint64_t settled = 0;
  std::uint64_t pruned = 0;
};

/// Reach-pruned bidirectional point-to-point search. Holds its own
/// timestamped work arrays, so one instance per thread can answer any
/// number of queries without reallocation.
class ReachQuery {
 public:
  ReachQuery(const Graph& g, const ReachIndex& idx, bool use_shortcuts = true);

  Cost distance(VertexId from, VertexId to);

  const QueryStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }

 private:
  struct Side {
    std::vector<Cost> dist;
    std::vector<std::uint32_t> stamp;
    std::vector<std::uint32_t> settled;
    std::vector<VertexId> pred;
    std::vector<std::uint64_t> step;
    MinHeap heap;
  };

  Cost path_cost(VertexId meet) const;

  Cost label(const Side& side, VertexId v) const {
    return side.stamp[v] == epoch_ ? side.dist[v] : kInfCost;
  }

  const Graph* graph_;
  const ReachIndex* index_;
  bool use_shortcuts_;
  std::uint32_t epoch_ = 0;
  Side sides_[2];
  QueryStats stats_;
};

/// One-shot convenience wrapper around ReachQuery.
Cost re_distance(const Graph& g, const ReachIndex& idx, VertexId from, VertexId to);

}  // namespace revc
