#pragma once

#include <cstdint>
#include <vector>

#include "revc/graph.hpp"
#include "revc/reach.hpp"
#include "revc/tree_growth.hpp"

namespace revc {

/// Edges scanned from at least one origin and one destination, by id.
struct ViaEdgeSet {
  std::vector<EdgeId> edges;

  /// Distinct tails of the member edges, ascending.
  std::vector<VertexId> via_vertices(const Graph& g) const;
};

ViaEdgeSet collect_via_edges(const ScanRecord& scans);

/// Drops edges whose (origin, destination) scan sets are dominated by an
/// adjacent via edge (head of one is the tail of the other). Adjacent edges
/// with equal sets form a chain, of which the smallest id survives, unless
/// some member of the chain is dominated, in which case the whole chain is
/// removed.
ViaEdgeSet eliminate_dominated_edges(const Graph& g, const ScanRecord& scans, const ViaEdgeSet& es);

enum class TripleState : std::uint8_t { kPending, kAccepted, kRejected };

/// (origin ordinal, via vertex, destination ordinal).
struct CandidateTriple {
  std::uint32_t origin = 0;
  std::uint32_t dest = 0;
  VertexId via = kNoVertex;
  Cost via_len = 0;
  TripleState state = TripleState::kPending;
  double guaranteed_alpha = 0;
};

/// One triple per (s, v, t) for every surviving edge with tail v and
/// s in O_e, t in D_e. Pairs with s == t or unreachable t are skipped.
/// Sorted by (via, origin, dest).
std::vector<CandidateTriple> candidate_triples(const Graph& g, const ScanRecord& scans, const ViaEdgeSet& es,
                                               const TreeGrowthResult& trees, const DistanceMatrix& dm);

/// Keeps triples with via_len <= beta * dist(s, t) up to a relative tolerance.
std::vector<CandidateTriple> filter_by_length(std::vector<CandidateTriple> cands, const DistanceMatrix& dm,
                                              double beta, double rel_tol = kDefaultRelTol);

struct DedupStats {
  std::uint64_t merged = 0;
};

/// Per (s, t), merges triples whose lengths agree within `rel_tol` of the
/// first (shortest) member of their class. The survivor is the via vertex
/// scanned from the most origin-destination combinations, then the smaller
/// id. Output is sorted by (via, origin, dest).
std::vector<CandidateTriple> dedup_by_length(std::vector<CandidateTriple> cands, const ScanRecord& scans,
                                             double rel_tol = kDefaultRelTol, DedupStats* stats = nullptr);

}  // namespace revc
