#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "revc/oracle.hpp"
#include "revc/pipeline.hpp"
#include "revc/reach.hpp"
#include "revc/tree_growth.hpp"
#include "revc/via_selection.hpp"
#include "support/random_graph.hpp"
#include "support/scenario.hpp"

using namespace revc;

using testing::grow_full;
using testing::Grown;
using testing::ids;

namespace {

Graph parse(const std::string& rows) { return testing::parse_rows(rows); }

std::set<std::pair<std::string, std::string>> edge_names(const Graph& g, const ViaEdgeSet& es) {
  std::set<std::pair<std::string, std::string>> out;
  for (EdgeId e : es.edges) out.emplace(g.label(g.edge(e).tail), g.label(g.edge(e).head));
  return out;
}

}  // namespace

TEST_CASE("u-turn spur vertices are scanned from both sides but are not via vertices") {
  // s-a-j-b-t along the bottom, a dead-end spur j-x-y on top.
  const Graph g = parse("s\ta\t1\t1\na\tj\t1\t1\nj\tb\t1\t1\nb\tt\t1\t1\nj\tx\t1\t1\nx\ty\t1\t1\n");
  const Grown r = grow_full(g, ids(g, {"s"}), ids(g, {"t"}));
  for (VertexId v : ids(g, {"x", "y"})) {
    CHECK(r.trees.forward[0].contains(v));
    CHECK(r.trees.backward[0].contains(v));
  }
  const ViaEdgeSet es = collect_via_edges(r.trees.scans);
  const std::set<std::pair<std::string, std::string>> expected{{"s", "a"}, {"a", "j"}, {"j", "b"}, {"b", "t"}};
  CHECK(edge_names(g, es) == expected);
  CHECK(es.via_vertices(g) == ids(g, {"s", "a", "j", "b"}));
}

TEST_CASE("path edges are all via edges; an equal chain keeps one") {
  const Graph g = parse("A\tB\t1\t0\nB\tC\t1\t0\nC\tD\t1\t0\n");
  const Grown r = grow_full(g, ids(g, {"A"}), ids(g, {"D"}));
  const ViaEdgeSet es = collect_via_edges(r.trees.scans);
  CHECK(es.edges.size() == 3);
  const ViaEdgeSet kept = eliminate_dominated_edges(g, r.trees.scans, es);
  REQUIRE(kept.edges.size() == 1);
  CHECK(kept.edges[0] == *std::min_element(es.edges.begin(), es.edges.end()));
}

TEST_CASE("an edge whose origin set is dominated by its predecessor is dropped") {
  // s2 reaches r directly, so (q, r) is scanned from s1 only while (p, q)
  // is scanned from both origins.
  const Graph g = parse("s1\tp\t1\t0\ns2\tp\t1\t0\np\tq\t1\t0\nq\tr\t1\t0\nr\tt\t1\t0\ns2\tr\t2.5\t0\n");
  const Grown r = grow_full(g, ids(g, {"s1", "s2"}), ids(g, {"t"}));
  const ViaEdgeSet es = collect_via_edges(r.trees.scans);
  const std::set<std::pair<std::string, std::string>> all{{"s1", "p"}, {"p", "q"}, {"q", "r"}, {"r", "t"}, {"s2", "r"}};
  CHECK(edge_names(g, es) == all);
  const ViaEdgeSet kept = eliminate_dominated_edges(g, r.trees.scans, es);
  const std::set<std::pair<std::string, std::string>> survivors{{"p", "q"}, {"r", "t"}};
  CHECK(edge_names(g, kept) == survivors);
}

TEST_CASE("a detour whose via vertex has no shared tree edge is not represented") {
  // P = s x u v w y t. The shortcut x->w bypasses v from the origin side,
  // u->y from the destination side; both edges next to v are one-sided.
  const Graph g = parse(
      "s\tx\t1\t0\nx\tu\t1\t0\nu\tv\t10\t0\nv\tw\t10\t0\nw\ty\t1\t0\ny\tt\t1\t0\n"
      "x\tw\t19.5\t0\nu\ty\t19.6\t0\n");
  const VertexId s = *g.find("s"), t = *g.find("t"), v = *g.find("v");
  DistanceTable table(g);
  const auto admissible = oracle_admissible(g, s, t, 0.2, 1.5, table);
  const std::vector<VertexId> p = ids(g, {"s", "x", "u", "v", "w", "y", "t"});
  auto it = std::find_if(admissible.begin(), admissible.end(), [&](const OracleRoute& r) { return r.vertices == p; });
  REQUIRE(it != admissible.end());
  CHECK(it->exact_factor == doctest::Approx(10.0 / 24.0));
  CHECK_FALSE(edge_represented(g, *it, oracle_tree(g, s, Direction::kForward), oracle_tree(g, t, Direction::kBackward)));

  const Grown r = grow_full(g, {s}, {t});
  const auto vias = collect_via_edges(r.trees.scans).via_vertices(g);
  CHECK(std::find(vias.begin(), vias.end(), v) == vias.end());
  CHECK(r.trees.forward[0].contains(v));
  CHECK(r.trees.backward[0].contains(v));

  RevcParams params;
  params.shortcut_cap = 0;
  const RevcResult res = run_revc(g, compute_reach_bounds(g, {}), OdSet::cross({s}, {t}), params);
  SandwichPair pair{s, t, {}};
  for (const auto& route : res.routes) pair.returned.push_back(route.vertices);
  CHECK(std::find(pair.returned.begin(), pair.returned.end(), p) == pair.returned.end());
  const SandwichReport rep = compare_with_oracle(g, std::span(&pair, 1), 0.2, 1.5, 0.9, 1.1);
  CHECK(rep.unrepresented == 1);
  CHECK(rep.missing == 0);
  CHECK(rep.spurious == 0);
}

TEST_CASE("length filter keeps shortest-path vias for any beta and only those at beta one") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Graph g = perturb_costs(testing::geometric_graph({.vertices = 150, .seed = seed}), {});
    const auto o = testing::random_vertices(g.num_vertices(), 4, seed + 100);
    const auto d = testing::random_vertices(g.num_vertices(), 4, seed + 200);
    const Grown r = grow_full(g, o, d);
    ViaEdgeSet es = collect_via_edges(r.trees.scans);
    const auto cands = candidate_triples(g, r.trees.scans, es, r.trees, r.dm);
    REQUIRE_FALSE(cands.empty());
    const auto one = filter_by_length(cands, r.dm, 1.0);
    const auto wide = filter_by_length(cands, r.dm, 1.5);
    for (const auto& c : one) CHECK(c.via_len == doctest::Approx(r.dm.at(c.origin, c.dest)).epsilon(1e-12));

    std::size_t expected_wide = 0, expected_one = 0;
    for (const auto& c : cands) {
      const auto f = oracle_tree(g, o[c.origin], Direction::kForward);
      const auto b = oracle_tree(g, d[c.dest], Direction::kBackward);
      const Cost len = f.cost[c.via] + b.cost[c.via];
      CHECK(len == doctest::Approx(c.via_len).epsilon(1e-12));
      expected_wide += len <= 1.5 * f.cost[d[c.dest]] * (1 + 1e-12);
      expected_one += len <= f.cost[d[c.dest]] * (1 + 1e-12);
    }
    CHECK(wide.size() == expected_wide);
    CHECK(one.size() == expected_one);
  }
}

TEST_CASE("vias on one shortest path collapse to one candidate") {
  const Graph g = parse("A\tB\t1\t0\nB\tC\t1\t0\nC\tD\t1\t0\n");
  const Grown r = grow_full(g, ids(g, {"A"}), ids(g, {"D"}));
  const ViaEdgeSet es = collect_via_edges(r.trees.scans);
  auto cands = candidate_triples(g, r.trees.scans, es, r.trees, r.dm);
  CHECK(cands.size() == 3);
  DedupStats stats;
  const auto kept = dedup_by_length(cands, r.trees.scans, kDefaultRelTol, &stats);
  CHECK(kept.size() == 1);
  CHECK(stats.merged == 2);
}

TEST_CASE("length dedup separates distinct lengths and merges ties") {
  // Via B and via D around a unit four-cycle from A to C.
  const Graph g = parse("A\tB\t1\t1\nB\tC\t1\t1\nC\tD\t1\t1\nD\tA\t1\t1\n");
  ScanRecord scans;
  scans.num_origins = 1;
  scans.num_destinations = 1;
  scans.origin_count.assign(4, 1);
  scans.dest_count.assign(4, 1);
  auto triples = [&](const Graph& h) {
    const auto f = oracle_tree(h, 0, Direction::kForward);
    const auto b = oracle_tree(h, 2, Direction::kBackward);
    std::vector<CandidateTriple> out;
    for (VertexId via : {*h.find("B"), *h.find("D")}) {
      CandidateTriple c;
      c.via = via;
      c.via_len = f.cost[via] + b.cost[via];
      out.push_back(c);
    }
    return out;
  };
  CHECK(dedup_by_length(triples(g), scans).size() == 1);
  CHECK(dedup_by_length(triples(perturb_costs(g, {1e-6, 3})), scans).size() == 2);
}

TEST_CASE("dedup keeps the most widely scanned via, then the smaller id") {
  ScanRecord scans;
  scans.num_origins = 2;
  scans.num_destinations = 2;
  scans.origin_count = {1, 2, 1, 2};
  scans.dest_count = {1, 1, 2, 2};
  std::vector<CandidateTriple> cands(4);
  for (VertexId v = 0; v < 4; ++v) {
    cands[v].via = v;
    cands[v].via_len = 5;
  }
  auto kept = dedup_by_length(cands, scans);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].via == 3);
  scans.origin_count = {2, 2, 1, 1};
  scans.dest_count = {1, 1, 1, 1};
  kept = dedup_by_length(cands, scans);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].via == 0);
}
