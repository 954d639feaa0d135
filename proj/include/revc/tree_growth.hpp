#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "revc/endpoint_set.hpp"
#include "revc/graph.hpp"
#include "revc/reach.hpp"

namespace revc {

/// max{(1 - alpha) * beta * m, beta * m / 2}
Cost tree_height_bound(double alpha, double beta, Cost m);

struct EndpointBounds {
  std::vector<Cost> origin_max, origin_min;
  std::vector<Cost> dest_max, dest_min;
  double alpha = 0.2;
  double beta = 1.5;

  static EndpointBounds from(const DistanceMatrix& dm, double alpha, double beta);
};

struct TreeOptions {
  bool reach_prune = true;   // false: every bound treated as infinite
  bool dmin_prune = true;    // false: second pass grows like the first (no early pruning)
  bool naive_height = false; // true: grow to beta * M instead of the tight bound
  unsigned threads = 1;
};

/// Sparse tree: only included vertices are stored. Costs are exact
/// distances from (forward) or to (backward) the root.
struct GrownTree {
  VertexId root = kNoVertex;
  Direction direction = Direction::kForward;
  Cost height = 0;
  std::vector<VertexId> vertex;
  std::vector<Cost> cost;
  std::vector<VertexId> parent;
  std::vector<EdgeId> parent_edge;
  std::unordered_map<VertexId, std::uint32_t> slot;

  std::optional<std::uint32_t> find(VertexId v) const {
    auto it = slot.find(v);
    if (it == slot.end()) return std::nullopt;
    return it->second;
  }
  bool contains(VertexId v) const { return slot.count(v) != 0; }
  Cost cost_of(VertexId v) const {
    auto i = find(v);
    return i ? cost[*i] : kInfCost;
  }
  VertexId parent_of(VertexId v) const {
    auto i = find(v);
    return i ? parent[*i] : kNoVertex;
  }
};

struct TreeStats {
  std::uint64_t included = 0;
  std::uint64_t expanded = 0;
  std::uint64_t pruned = 0;
  std::uint64_t ghost_settled = 0;

  TreeStats& operator+=(const TreeStats& o) {
    included += o.included;
    expanded += o.expanded;
    pruned += o.pruned;
    ghost_settled += o.ghost_settled;
    return *this;
  }
};

/// Which endpoints scanned each edge, plus per-vertex scan counts.
struct ScanRecord {
  std::size_t num_origins = 0;
  std::size_t num_destinations = 0;
  std::unordered_map<EdgeId, EndpointSet> origin_scans;
  std::unordered_map<EdgeId, EndpointSet> dest_scans;
  std::vector<std::uint32_t> origin_count;  // |O_v|
  std::vector<std::uint32_t> dest_count;    // |D_v|
};

/// Per vertex, the smallest cost with which a first-pass tree included it.
using DMinMap = std::vector<Cost>;

/// One tree. `dmin` selects second-pass behaviour (inclusion test and early
/// pruning of labels); pass nullptr for a first-pass tree.
GrownTree grow_tree(const Graph& g, const std::vector<Cost>& bound, VertexId root, Direction direction,
                    Cost height, Cost nearest_partner, double alpha, const DMinMap* dmin,
                    TreeStats* stats = nullptr);

struct PassResult {
  std::vector<GrownTree> trees;
  TreeStats stats;
};

/// All trees on one side. Forward trees use origin bounds, backward trees
/// destination bounds.
PassResult grow_pass(const Graph& g, const ReachIndex& idx, std::span<const VertexId> roots, Direction direction,
                     const EndpointBounds& bounds, const TreeOptions& opts, const DMinMap* dmin);

PassResult grow_forward_trees(const Graph& g, const ReachIndex& idx, std::span<const VertexId> origins,
                              const EndpointBounds& bounds, const TreeOptions& opts, const DMinMap* dmin = nullptr);
PassResult grow_backward_trees(const Graph& g, const ReachIndex& idx, std::span<const VertexId> destinations,
                               const EndpointBounds& bounds, const TreeOptions& opts,
                               const DMinMap* dmin = nullptr);

DMinMap build_dmin(std::size_t num_vertices, const std::vector<GrownTree>& trees);

/// The side with fewer endpoints grows first; ties grow forward first.
Direction direction_order(std::size_t num_origins, std::size_t num_destinations);

struct TreeGrowthResult {
  Direction first = Direction::kForward;
  std::vector<GrownTree> forward;
  std::vector<GrownTree> backward;
  ScanRecord scans;
  DMinMap dmin;
  TreeStats forward_stats;
  TreeStats backward_stats;
};

/// Both passes in balance order, then the scan record.
TreeGrowthResult grow_all_trees(const Graph& g, const ReachIndex& idx, const DistanceMatrix& dm,
                                const EndpointBounds& bounds, const TreeOptions& opts);

ScanRecord build_scan_record(std::size_t num_vertices, const std::vector<GrownTree>& forward,
                             const std::vector<GrownTree>& backward);

}  // namespace revc
