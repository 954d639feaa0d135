#pragma once

#include <map>
#include <span>
#include <unordered_map>
#include <vector>

#include "revc/graph.hpp"

namespace revc {

/// Plain shortest-path tree with (cost, id) tie-breaking. Kept separate from
/// the pipeline's search code on purpose.
struct OracleTree {
  std::vector<Cost> cost;
  std::vector<VertexId> parent;
};
OracleTree oracle_tree(const Graph& g, VertexId root, Direction direction);

/// Memoized single-source distances for arbitrary point queries.
class DistanceTable {
 public:
  explicit DistanceTable(const Graph& g) : g_(&g) {}
  Cost distance(VertexId from, VertexId to);

 private:
  const Graph* g_;
  std::unordered_map<VertexId, std::vector<Cost>> rows_;
};

struct OracleRoute {
  VertexId origin = kNoVertex;
  VertexId via = kNoVertex;
  VertexId dest = kNoVertex;
  std::vector<VertexId> vertices;
  Cost length = 0;
  double exact_factor = -1;  // unset until computed
};

/// Every distinct v-path from s to t, one per vertex sequence (the
/// smallest via vertex represents it). Sorted by (length, vertices).
std::vector<OracleRoute> enumerate_via_paths(const Graph& g, VertexId s, VertexId t);

/// Largest alpha in [0, 1] for which the path is alpha-relative locally
/// optimal: the shortest interior over non-shortest subpaths, divided by the
/// path length.
double local_optimality_factor(const Graph& g, std::span<const VertexId> vertices, DistanceTable& table,
                               double rel_tol = kDefaultRelTol);

/// Length of a vertex sequence over existing edges; kInfCost if some hop is
/// not an edge.
Cost path_length(const Graph& g, std::span<const VertexId> vertices);

/// Routes with factor >= alpha and length <= beta * d(s, t), factors filled.
std::vector<OracleRoute> oracle_admissible(const Graph& g, VertexId s, VertexId t, double alpha, double beta,
                                           DistanceTable& table, double rel_tol = kDefaultRelTol);

/// True if some edge (a, b) of the route lies in both full trees (a is b's
/// parent from s, b is a's parent toward t) and the v-path via a is the
/// route itself; such routes can be found through a via edge.
bool edge_represented(const Graph& g, const OracleRoute& route, const OracleTree& from_s, const OracleTree& to_t);

struct SandwichPair {
  VertexId origin;
  VertexId dest;
  std::vector<std::vector<VertexId>> returned;
};

struct SandwichReport {
  std::size_t returned = 0;
  std::size_t admissible = 0;       // oracle factor >= alpha
  std::size_t strong = 0;           // oracle factor >= alpha * delta
  std::size_t spurious = 0;         // returned with factor < alpha * gamma or too long
  std::size_t missing = 0;          // strong, edge-represented, not returned
  std::size_t unrepresented = 0;    // strong but not edge-represented
  std::size_t exact_mismatch = 0;   // symmetric difference against represented admissible set
  std::vector<std::vector<VertexId>> spurious_routes;
  std::vector<std::vector<VertexId>> missing_routes;
};

/// Checks returned routes against the oracle for each listed pair.
SandwichReport compare_with_oracle(const Graph& g, std::span<const SandwichPair> pairs, double alpha, double beta,
                                   double gamma, double delta, double rel_tol = kDefaultRelTol);

}  // namespace revc
