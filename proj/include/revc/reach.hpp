#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "revc/graph.hpp"
#include "revc/reach_index.hpp"

namespace revc {

/// Brute-force reach of `v` over all shortest paths (any tie). O(n^3) via
/// all-pairs distances; oracle use only.
Cost exact_reach(const Graph& g, VertexId v, double rel_tol = kDefaultRelTol);

/// Exact reaches of every vertex, one shortest-path DAG per root. Costs
/// O(n m log n); used for small graphs and as the certification step of
/// the iterative scheme (where `radius` truncates each DAG).
std::vector<Cost> exact_reaches(const Graph& g, unsigned threads = 1, double rel_tol = kDefaultRelTol);

struct ReachOptions {
  Cost cap = 0;
  std::size_t exact_limit = 2000;
  unsigned threads = 1;
  int max_rounds = 24;
  // Total settled vertices over all rounds before the remaining vertices
  // are given up on (bound ∞).
  std::uint64_t work_limit = 400'000'000;
};

/// Reach upper bounds plus shortcuts of cost <= cap around degree-two
/// chains. Exact reaches below `exact_limit` vertices, otherwise rounds of
/// truncated trees with a doubling certification threshold.
ReachIndex compute_reach_bounds(const Graph& g, const ReachOptions& opts = {});

/// Maximal chains of degree-two vertices, bypassed by one shortcut per
/// traversable direction when the chain cost is <= cap.
std::vector<Shortcut> chain_shortcuts(const Graph& g, Cost cap);

/// Row-major |O| x |D| shortest distances with per-endpoint aggregates over
/// the reachable partners only. Endpoints without reachable partners get
/// M = L = 0.
struct DistanceMatrix {
  std::vector<VertexId> origins;
  std::vector<VertexId> destinations;
  std::vector<Cost> dist;
  std::vector<Cost> origin_max, origin_min;
  std::vector<Cost> dest_max, dest_min;

  Cost at(std::size_t oi, std::size_t di) const { return dist[oi * destinations.size() + di]; }
  /// Recomputes the M/L aggregates from `dist`.
  void refresh_aggregates();
  /// Mean over finite entries with distinct endpoints; 0 if there are none.
  Cost mean_finite() const;
};

DistanceMatrix od_distance_matrix(const Graph& g, std::span<const VertexId> origins,
                                  std::span<const VertexId> destinations, unsigned threads = 1);

/// Everything a cached index depends on besides its content.
struct IndexKey {
  std::uint64_t graph_hash = 0;
  double perturbation = 0;
  std::uint64_t seed = 0;
  bool trimmed = false;
  std::vector<std::string> trim_keep;
  std::uint64_t num_vertices = 0;

  friend bool operator==(const IndexKey&, const IndexKey&) = default;
};

void save_index(std::ostream& out, const IndexKey& key, const ReachIndex& idx);
void save_index_file(const std::string& path, const IndexKey& key, const ReachIndex& idx);

struct LoadedIndex {
  IndexKey key;
  ReachIndex index;
};
LoadedIndex load_index(std::istream& in);
LoadedIndex load_index_file(const std::string& path);

}  // namespace revc
