#include "revc/via_selection.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace revc {

std::vector<VertexId> ViaEdgeSet::via_vertices(const Graph& g) const {
  std::vector<VertexId> out;
  out.reserve(edges.size());
  for (EdgeId e : edges) out.push_back(g.edge(e).tail);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ViaEdgeSet collect_via_edges(const ScanRecord& scans) {
  ViaEdgeSet es;
  for (const auto& [e, origins] : scans.origin_scans) {
    if (origins.empty()) continue;
    auto it = scans.dest_scans.find(e);
    if (it != scans.dest_scans.end() && !it->second.empty()) es.edges.push_back(e);
  }
  std::sort(es.edges.begin(), es.edges.end());
  return es;
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

ViaEdgeSet eliminate_dominated_edges(const Graph& g, const ScanRecord& scans, const ViaEdgeSet& es) {
  const std::size_t k = es.edges.size();
  std::vector<const EndpointSet*> os(k), ds(k);
  std::unordered_map<VertexId, std::vector<std::size_t>> by_tail;
  for (std::size_t i = 0; i < k; ++i) {
    os[i] = &scans.origin_scans.at(es.edges[i]);
    ds[i] = &scans.dest_scans.at(es.edges[i]);
    by_tail[g.edge(es.edges[i]).tail].push_back(i);
  }

  DisjointSets chains(k);
  std::vector<char> dominated(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    auto it = by_tail.find(g.edge(es.edges[i]).head);
    if (it == by_tail.end()) continue;
    // Edge i directly precedes every edge j starting where i ends.
    for (std::size_t j : it->second) {
      const bool o_sub = os[i]->subset_of(*os[j]);
      const bool d_sub = ds[i]->subset_of(*ds[j]);
      const bool o_sup = os[j]->subset_of(*os[i]);
      const bool d_sup = ds[j]->subset_of(*ds[i]);
      if (o_sub && d_sub && o_sup && d_sup) {
        chains.unite(i, j);
      } else if (o_sub && d_sub) {
        dominated[i] = 1;
      } else if (o_sup && d_sup) {
        dominated[j] = 1;
      }
    }
  }

  std::vector<char> chain_dominated(k, 0);
  for (std::size_t i = 0; i < k; ++i) {
    if (dominated[i]) chain_dominated[chains.find(i)] = 1;
  }
  ViaEdgeSet out;
  for (std::size_t i = 0; i < k; ++i) {
    // Union by smaller index makes the root the smallest edge id in the chain.
    if (chains.find(i) == i && !chain_dominated[i]) out.edges.push_back(es.edges[i]);
  }
  return out;
}

std::vector<CandidateTriple> candidate_triples(const Graph& g, const ScanRecord& scans, const ViaEdgeSet& es,
                                               const TreeGrowthResult& trees, const DistanceMatrix& dm) {
  std::vector<CandidateTriple> out;
  for (EdgeId e : es.edges) {
    const VertexId v = g.edge(e).tail;
    const EndpointSet& os = scans.origin_scans.at(e);
    const EndpointSet& ds = scans.dest_scans.at(e);
    os.for_each([&](std::size_t s) {
      const Cost to_v = trees.forward[s].cost_of(v);
      ds.for_each([&](std::size_t t) {
        if (dm.origins[s] == dm.destinations[t] || dm.at(s, t) == kInfCost) return;
        CandidateTriple c;
        c.origin = static_cast<std::uint32_t>(s);
        c.dest = static_cast<std::uint32_t>(t);
        c.via = v;
        c.via_len = to_v + trees.backward[t].cost_of(v);
        out.push_back(c);
      });
    });
  }
  auto key = [](const CandidateTriple& c) { return std::tuple(c.via, c.origin, c.dest); };
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  out.erase(std::unique(out.begin(), out.end(), [&](const auto& a, const auto& b) { return key(a) == key(b); }),
            out.end());
  return out;
}

std::vector<CandidateTriple> filter_by_length(std::vector<CandidateTriple> cands, const DistanceMatrix& dm,
                                              double beta, double rel_tol) {
  std::erase_if(cands, [&](const CandidateTriple& c) {
    const Cost limit = beta * dm.at(c.origin, c.dest);
    return c.via_len > limit + rel_tol * limit;
  });
  return cands;
}

std::vector<CandidateTriple> dedup_by_length(std::vector<CandidateTriple> cands, const ScanRecord& scans,
                                             double rel_tol, DedupStats* stats) {
  std::sort(cands.begin(), cands.end(), [](const CandidateTriple& a, const CandidateTriple& b) {
    return std::tie(a.origin, a.dest, a.via_len, a.via) < std::tie(b.origin, b.dest, b.via_len, b.via);
  });
  auto score = [&](VertexId v) {
    return static_cast<std::uint64_t>(scans.origin_count[v]) * scans.dest_count[v];
  };
  auto better = [&](const CandidateTriple& a, const CandidateTriple& b) {
    const auto sa = score(a.via);
    const auto sb = score(b.via);
    return sa != sb ? sa > sb : a.via < b.via;
  };

  std::vector<CandidateTriple> out;
  std::size_t i = 0;
  while (i < cands.size()) {
    const CandidateTriple& anchor = cands[i];
    CandidateTriple best = anchor;
    std::size_t j = i + 1;
    while (j < cands.size() && cands[j].origin == anchor.origin && cands[j].dest == anchor.dest &&
           cands[j].via_len - anchor.via_len <= rel_tol * cands[j].via_len) {
      if (better(cands[j], best)) best = cands[j];
      ++j;
    }
    if (stats) stats->merged += j - i - 1;
    out.push_back(best);
    i = j;
  }
  std::sort(out.begin(), out.end(), [](const CandidateTriple& a, const CandidateTriple& b) {
    return std::tie(a.via, a.origin, a.dest) < std::tie(b.via, b.origin, b.dest);
  });
  return out;
}

}  // namespace revc
