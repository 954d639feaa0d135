#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "revc/endpoint_set.hpp"
#include "revc/sp_engine.hpp"
#include "revc/tree_growth.hpp"
#include "revc/via_selection.hpp"

namespace revc {

/// A branch of the tree walked from the via vertex toward its endpoint:
/// `vertex[0]` is the via vertex, `dist[i]` the distance between vertex[i]
/// and the via vertex along the branch.
struct Branch {
  std::vector<VertexId> vertex;
  std::vector<Cost> dist;
  bool reaches_end = false;  // the walk ended at the endpoint itself
};

/// Per via vertex: membership flags and the walked branches.
struct PrepData {
  VertexId via = kNoVertex;
  std::unordered_map<std::uint32_t, Branch> origin_branch;
  std::unordered_map<std::uint32_t, Branch> dest_branch;
  // A[u] over origins (u on the branch toward that origin) and over
  // destinations. The via vertex itself is flagged for every endpoint.
  std::unordered_map<VertexId, EndpointSet> origin_flags;
  std::unordered_map<VertexId, EndpointSet> dest_flags;

  bool origin_flag(VertexId u, std::uint32_t s) const {
    auto it = origin_flags.find(u);
    return it != origin_flags.end() && it->second.test(s);
  }
  bool dest_flag(VertexId w, std::uint32_t t) const {
    auto it = dest_flags.find(w);
    return it != dest_flags.end() && it->second.test(t);
  }
};

/// Walks each origin branch until it passes alpha times the longest
/// candidate length of that origin (the first vertex beyond is included),
/// and likewise for destinations. `cands` are the triples of this via
/// vertex only.
PrepData prepare_via_vertex(VertexId via, const TreeGrowthResult& trees, const std::vector<CandidateTriple>& cands,
                            double alpha, std::size_t num_origins, std::size_t num_destinations);

/// Vertex pairs (u, w) around one via vertex already shown to satisfy
/// d(u, w) = d(u, via) + d(via, w).
class SectionCache {
 public:
  bool contains(VertexId u, VertexId w) const { return pairs_.count(key(u, w)) != 0; }
  void insert(VertexId u, VertexId w) { pairs_.insert(key(u, w)); }
  std::size_t size() const { return pairs_.size(); }

 private:
  static std::uint64_t key(VertexId u, VertexId w) { return (std::uint64_t{u} << 32) | w; }
  std::unordered_set<std::uint64_t> pairs_;
};

/// The section of a v-path probed by the test. Index 0 is the first vertex
/// at distance >= T before the via vertex (or the origin), `via_index` the
/// via vertex, and the last index the first vertex at distance >= T after it
/// (or the destination). `offset[i]` is the distance from index 0.
struct ProbeSection {
  std::vector<VertexId> vertex;
  std::vector<Cost> offset;
  std::size_t via_index = 0;
  bool starts_at_origin = false;
  bool ends_at_destination = false;

  Cost span(std::size_t i, std::size_t j) const { return offset[j] - offset[i]; }
};

ProbeSection probe_section(const Branch& to_origin, const Branch& to_dest, Cost t);

struct TestOutcome {
  bool accepted = false;
  // Reject: the failing pair, and its neighbours toward the via vertex.
  VertexId fail_u = kNoVertex, fail_w = kNoVertex;
  VertexId trim_x = kNoVertex, trim_y = kNoVertex;
  Cost trimmed_length = 0;
  // Accept: the span that was certified.
  VertexId span_x = kNoVertex, span_y = kNoVertex;
  bool span_x_is_origin = false;
  bool span_y_is_destination = false;
  std::uint32_t queries = 0;
  std::uint32_t cache_hits = 0;
};

/// Approximate T-local optimality test of one probed section with precision
/// delta in [1, 2]. Certifies a chain of overlapping pairs with point-to-point
/// queries; with delta = 1 the verdict equals checking every T-significant
/// subpath. Pass a cache to reuse (and extend) certified pairs.
TestOutcome t_delta_test(const ProbeSection& section, Cost t, double delta, ReachQuery& query,
                         SectionCache* cache = nullptr, double rel_tol = kDefaultRelTol);

struct Step4Options {
  double alpha = 0.2;
  double gamma = 0.9;
  double delta = 1.1;
  bool batching = true;
  bool use_cache = true;
  unsigned threads = 1;
  double rel_tol = kDefaultRelTol;
};

struct Step4Stats {
  std::uint64_t tests = 0;
  std::uint64_t queries = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t max_queries_per_test = 0;
  std::uint64_t accepted_direct = 0;
  std::uint64_t accepted_batch = 0;
  std::uint64_t rejected_direct = 0;
  std::uint64_t rejected_batch = 0;

  Step4Stats& operator+=(const Step4Stats& o);
};

/// Marks pending triples whose via branches contain the failing pair.
/// Triples must belong to the same via vertex and be sorted by via_len,
/// with `current` the probed one. Returns the number rejected.
std::size_t batch_reject(const TestOutcome& fail, const PrepData& prep, std::vector<CandidateTriple>& triples,
                         std::size_t current);

/// Accepts pending triples sharing the certified span whose length is at
/// most via_len / gamma; they get guaranteed factor alpha * gamma. When the
/// span ends at the probed path's own origin (or destination), only triples
/// with that endpoint qualify.
std::size_t batch_accept(const TestOutcome& pass, const PrepData& prep, std::vector<CandidateTriple>& triples,
                         std::size_t current, double alpha, double gamma, double rel_tol = kDefaultRelTol);

/// Runs the test over all triples of one via vertex in increasing length
/// order, with batch decisions. Triples are updated in place.
void process_via_vertex(VertexId via, std::vector<CandidateTriple>& triples, const TreeGrowthResult& trees,
                        std::size_t num_origins, std::size_t num_destinations, const Step4Options& opts,
                        ReachQuery& query, Step4Stats& stats);

struct AdmissibleRoute {
  std::uint32_t origin = 0;
  std::uint32_t dest = 0;
  VertexId via = kNoVertex;
  Cost cost = 0;
  double guaranteed_alpha = 0;
  std::vector<VertexId> vertices;
};

/// Concatenation of the tree paths origin -> via and via -> destination.
std::vector<VertexId> reconstruct_route(const TreeGrowthResult& trees, std::uint32_t origin, VertexId via,
                                        std::uint32_t dest);

/// All via vertices in parallel. `triples` must be sorted by via vertex
/// (as produced by dedup_by_length). Output sorted by (origin, dest, cost,
/// vertices).
std::vector<AdmissibleRoute> run_step4(const Graph& g, const ReachIndex& idx, std::vector<CandidateTriple> triples,
                                       const TreeGrowthResult& trees, std::size_t num_origins,
                                       std::size_t num_destinations, const Step4Options& opts,
                                       Step4Stats* stats = nullptr);

}  // namespace revc
