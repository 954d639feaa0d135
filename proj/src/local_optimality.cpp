#include "revc/local_optimality.hpp"

#include <algorithm>

#include "revc/parallel.hpp"

namespace revc {

Step4Stats& Step4Stats::operator+=(const Step4Stats& o) {
  tests += o.tests;
  queries += o.queries;
  cache_hits += o.cache_hits;
  max_queries_per_test = std::max(max_queries_per_test, o.max_queries_per_test);
  accepted_direct += o.accepted_direct;
  accepted_batch += o.accepted_batch;
  rejected_direct += o.rejected_direct;
  rejected_batch += o.rejected_batch;
  return *this;
}

namespace {

Branch walk_branch(const GrownTree& tree, VertexId via, Cost limit) {
  Branch b;
  const Cost at_via = tree.cost_of(via);
  VertexId u = via;
  while (true) {
    const Cost d = at_via - tree.cost_of(u);
    b.vertex.push_back(u);
    b.dist.push_back(d);
    if (u == tree.root) {
      b.reaches_end = true;
      break;
    }
    if (d > limit) break;
    u = tree.parent_of(u);
  }
  return b;
}

void flag_branch(const Branch& b, std::uint32_t endpoint, std::size_t universe,
                 std::unordered_map<VertexId, EndpointSet>& flags) {
  for (VertexId u : b.vertex) {
    auto it = flags.find(u);
    if (it == flags.end()) it = flags.emplace(u, EndpointSet(universe)).first;
    it->second.set(endpoint);
  }
}

}  // namespace

PrepData prepare_via_vertex(VertexId via, const TreeGrowthResult& trees, const std::vector<CandidateTriple>& cands,
                            double alpha, std::size_t num_origins, std::size_t num_destinations) {
  std::unordered_map<std::uint32_t, Cost> origin_longest;
  std::unordered_map<std::uint32_t, Cost> dest_longest;
  for (const auto& c : cands) {
    auto& lo = origin_longest[c.origin];
    lo = std::max(lo, c.via_len);
    auto& ld = dest_longest[c.dest];
    ld = std::max(ld, c.via_len);
  }
  PrepData prep;
  prep.via = via;
  for (const auto& [s, longest] : origin_longest) {
    Branch b = walk_branch(trees.forward[s], via, alpha * longest);
    flag_branch(b, s, num_origins, prep.origin_flags);
    prep.origin_branch.emplace(s, std::move(b));
  }
  for (const auto& [t, longest] : dest_longest) {
    Branch b = walk_branch(trees.backward[t], via, alpha * longest);
    flag_branch(b, t, num_destinations, prep.dest_flags);
    prep.dest_branch.emplace(t, std::move(b));
  }
  return prep;
}

ProbeSection probe_section(const Branch& to_origin, const Branch& to_dest, Cost t) {
  auto cut = [t](const Branch& b) {
    std::size_t i = 0;
    while (i + 1 < b.vertex.size() && b.dist[i] < t) ++i;
    return i;
  };
  const std::size_t i_end = cut(to_origin);
  const std::size_t j_end = cut(to_dest);
  ProbeSection sec;
  const Cost head = to_origin.dist[i_end];
  for (std::size_t i = i_end + 1; i-- > 0;) {
    sec.vertex.push_back(to_origin.vertex[i]);
    sec.offset.push_back(head - to_origin.dist[i]);
  }
  sec.via_index = i_end;
  for (std::size_t j = 1; j <= j_end; ++j) {
    sec.vertex.push_back(to_dest.vertex[j]);
    sec.offset.push_back(head + to_dest.dist[j]);
  }
  sec.starts_at_origin = to_origin.reaches_end && i_end + 1 == to_origin.vertex.size() && head < t;
  sec.ends_at_destination = to_dest.reaches_end && j_end + 1 == to_dest.vertex.size() && to_dest.dist[j_end] < t;
  return sec;
}

// Positions run from 0 (start of the section) through k (via vertex) to m.
// A pair (i, j) with i < k < j is T-significant when the part strictly
// between them is shorter than T. Each round certifies a pair (u, w) that
// reaches at least delta*T and covers every significant pair starting at u,
// then moves u to the first position whose significant pairs reach past w.
TestOutcome t_delta_test(const ProbeSection& sec, Cost t, double delta, ReachQuery& query, SectionCache* cache,
                         double rel_tol) {
  TestOutcome out;
  const std::size_t m = sec.vertex.size() - 1;
  const std::size_t k = sec.via_index;
  auto accept = [&] {
    out.accepted = true;
    out.span_x = sec.vertex.front();
    out.span_y = sec.vertex.back();
    out.span_x_is_origin = sec.starts_at_origin;
    out.span_y_is_destination = sec.ends_at_destination;
    return out;
  };
  if (k == 0 || k == m) return accept();

  const auto first = sec.offset.begin();
  // Smallest j in [k, m] with span(i, j) >= tau, else m.
  auto partner_after = [&](std::size_t i, Cost tau) {
    auto it = std::lower_bound(first + static_cast<std::ptrdiff_t>(k), sec.offset.end(), sec.offset[i] + tau);
    return it == sec.offset.end() ? m : static_cast<std::size_t>(it - first);
  };
  // Largest i in [0, k] with span(i, j) >= tau; -1 if there is none.
  auto partner_before = [&](std::size_t j, Cost tau) -> std::ptrdiff_t {
    auto it = std::upper_bound(first, first + static_cast<std::ptrdiff_t>(k) + 1, sec.offset[j] - tau);
    return (it - first) - 1;
  };

  std::size_t u = 0;
  while (u < k) {
    const std::size_t lo = partner_after(u + 1, t);
    std::size_t w = std::max(lo, partner_after(u, delta * t));
    bool cached = false;
    if (cache) {
      for (std::size_t j = m + 1; j-- > lo;) {
        if (cache->contains(sec.vertex[u], sec.vertex[j])) {
          w = j;
          cached = true;
          break;
        }
      }
    }
    if (cached) {
      ++out.cache_hits;
    } else {
      ++out.queries;
      const Cost along = sec.span(u, w);
      const Cost d = query.distance(sec.vertex[u], sec.vertex[w]);
      if (strictly_less(d, along, rel_tol)) {
        out.fail_u = sec.vertex[u];
        out.fail_w = sec.vertex[w];
        out.trim_x = sec.vertex[u + 1];
        out.trim_y = sec.vertex[w - 1];
        out.trimmed_length = sec.span(u + 1, w - 1);
        return out;
      }
      if (cache) cache->insert(sec.vertex[u], sec.vertex[w]);
    }
    if (w == m) break;
    const std::ptrdiff_t p = partner_before(w, t);
    u = std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(u) + 1, p);
  }
  return accept();
}

std::size_t batch_reject(const TestOutcome& fail, const PrepData& prep, std::vector<CandidateTriple>& triples,
                         std::size_t current) {
  std::size_t count = 0;
  for (std::size_t i = current + 1; i < triples.size(); ++i) {
    auto& c = triples[i];
    if (c.state != TripleState::kPending) continue;
    if (prep.origin_flag(fail.fail_u, c.origin) && prep.dest_flag(fail.fail_w, c.dest)) {
      c.state = TripleState::kRejected;
      ++count;
    }
  }
  return count;
}

std::size_t batch_accept(const TestOutcome& pass, const PrepData& prep, std::vector<CandidateTriple>& triples,
                         std::size_t current, double alpha, double gamma, double rel_tol) {
  const CandidateTriple& probed = triples[current];
  const Cost limit = probed.via_len / gamma;
  std::size_t count = 0;
  for (std::size_t i = current + 1; i < triples.size(); ++i) {
    auto& c = triples[i];
    if (c.state != TripleState::kPending) continue;
    if (c.via_len > limit + rel_tol * limit) continue;
    const bool origin_ok =
        pass.span_x_is_origin ? c.origin == probed.origin : prep.origin_flag(pass.span_x, c.origin);
    const bool dest_ok = pass.span_y_is_destination ? c.dest == probed.dest : prep.dest_flag(pass.span_y, c.dest);
    if (origin_ok && dest_ok) {
      c.state = TripleState::kAccepted;
      c.guaranteed_alpha = alpha * gamma;
      ++count;
    }
  }
  return count;
}

void process_via_vertex(VertexId via, std::vector<CandidateTriple>& triples, const TreeGrowthResult& trees,
                        std::size_t num_origins, std::size_t num_destinations, const Step4Options& opts,
                        ReachQuery& query, Step4Stats& stats) {
  std::sort(triples.begin(), triples.end(), [](const CandidateTriple& a, const CandidateTriple& b) {
    return std::tie(a.via_len, a.origin, a.dest) < std::tie(b.via_len, b.origin, b.dest);
  });
  const PrepData prep = prepare_via_vertex(via, trees, triples, opts.alpha, num_origins, num_destinations);
  SectionCache cache;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    auto& c = triples[i];
    if (c.state != TripleState::kPending) continue;
    const Cost t = opts.alpha * c.via_len;
    const ProbeSection sec = probe_section(prep.origin_branch.at(c.origin), prep.dest_branch.at(c.dest), t);
    const TestOutcome r = t_delta_test(sec, t, opts.delta, query, opts.use_cache ? &cache : nullptr, opts.rel_tol);
    ++stats.tests;
    stats.queries += r.queries;
    stats.cache_hits += r.cache_hits;
    stats.max_queries_per_test = std::max<std::uint64_t>(stats.max_queries_per_test, r.queries);
    if (r.accepted) {
      c.state = TripleState::kAccepted;
      c.guaranteed_alpha = opts.alpha;
      ++stats.accepted_direct;
      if (opts.batching) stats.accepted_batch += batch_accept(r, prep, triples, i, opts.alpha, opts.gamma, opts.rel_tol);
    } else {
      c.state = TripleState::kRejected;
      ++stats.rejected_direct;
      if (opts.batching) stats.rejected_batch += batch_reject(r, prep, triples, i);
    }
  }
}

std::vector<VertexId> reconstruct_route(const TreeGrowthResult& trees, std::uint32_t origin, VertexId via,
                                        std::uint32_t dest) {
  std::vector<VertexId> out;
  const GrownTree& f = trees.forward[origin];
  for (VertexId u = via; u != kNoVertex; u = f.parent_of(u)) out.push_back(u);
  std::reverse(out.begin(), out.end());
  const GrownTree& b = trees.backward[dest];
  for (VertexId u = b.parent_of(via); u != kNoVertex; u = b.parent_of(u)) out.push_back(u);
  return out;
}

std::vector<AdmissibleRoute> run_step4(const Graph& g, const ReachIndex& idx, std::vector<CandidateTriple> triples,
                                       const TreeGrowthResult& trees, std::size_t num_origins,
                                       std::size_t num_destinations, const Step4Options& opts, Step4Stats* stats) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  for (std::size_t i = 0; i < triples.size();) {
    std::size_t j = i;
    while (j < triples.size() && triples[j].via == triples[i].via) ++j;
    groups.emplace_back(i, j);
    i = j;
  }

  std::vector<std::vector<AdmissibleRoute>> found(groups.size());
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(groups.size(), std::max(1u, opts.threads) * 4));
  std::vector<Step4Stats> chunk_stats(chunks);
  parallel_for(chunks, opts.threads, [&](std::size_t ci) {
    ReachQuery query(g, idx);
    for (std::size_t gi = ci; gi < groups.size(); gi += chunks) {
      const auto [begin, end] = groups[gi];
      std::vector<CandidateTriple> mine(triples.begin() + static_cast<std::ptrdiff_t>(begin),
                                        triples.begin() + static_cast<std::ptrdiff_t>(end));
      const VertexId via = mine.front().via;
      process_via_vertex(via, mine, trees, num_origins, num_destinations, opts, query, chunk_stats[ci]);
      for (const auto& c : mine) {
        if (c.state != TripleState::kAccepted) continue;
        AdmissibleRoute r;
        r.origin = c.origin;
        r.dest = c.dest;
        r.via = c.via;
        r.cost = c.via_len;
        r.guaranteed_alpha = c.guaranteed_alpha;
        r.vertices = reconstruct_route(trees, c.origin, c.via, c.dest);
        found[gi].push_back(std::move(r));
      }
    }
  });

  std::vector<AdmissibleRoute> routes;
  for (auto& part : found) {
    for (auto& r : part) routes.push_back(std::move(r));
  }
  std::sort(routes.begin(), routes.end(), [](const AdmissibleRoute& a, const AdmissibleRoute& b) {
    return std::tie(a.origin, a.dest, a.cost, a.vertices, a.via) < std::tie(b.origin, b.dest, b.cost, b.vertices, b.via);
  });
  if (stats) {
    for (const auto& s : chunk_stats) *stats += s;
  }
  return routes;
}

}  // namespace revc
