#include <doctest.h>

#include <random>
#include <sstream>

#include "revc/reach.hpp"
#include "revc/sp_engine.hpp"
#include "support/random_graph.hpp"

using namespace revc;

namespace {

Graph abc_path() {
  std::istringstream in("from\tto\tcost\nA\tB\t1\nB\tC\t1\n");
  return load_graph(in).graph;
}

// Label-correcting reference search.
std::vector<Cost> bellman_ford(const Graph& g, VertexId root) {
  std::vector<Cost> d(g.num_vertices(), kInfCost);
  d[root] = 0;
  for (std::size_t round = 0; round < g.num_vertices(); ++round) {
    bool changed = false;
    for (const Edge& e : g.edges()) {
      if (d[e.tail] + e.cost < d[e.head]) {
        d[e.head] = d[e.tail] + e.cost;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return d;
}

// Reach from all-pairs distances: the best min-split over pairs whose
// shortest distance is attained through v.
Cost reach_from_all_pairs(const std::vector<std::vector<Cost>>& d, VertexId v) {
  Cost best = 0;
  for (std::size_t s = 0; s < d.size(); ++s) {
    for (std::size_t t = 0; t < d.size(); ++t) {
      if (d[s][v] == kInfCost || d[v][t] == kInfCost) continue;
      if (d[s][v] + d[v][t] <= d[s][t] * (1 + 1e-12)) best = std::max(best, std::min(d[s][v], d[v][t]));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("dijkstra on a path") {
  const Graph g = abc_path();
  const SpTree t = dijkstra_tree(g, 0, Direction::kForward);
  CHECK(t.cost == std::vector<Cost>{0, 1, 2});
  CHECK(t.parent[2] == 1);
  CHECK(t.chain_to_root(2) == std::vector<VertexId>{2, 1, 0});
  const SpTree b = dijkstra_tree(g, 2, Direction::kBackward);
  CHECK(b.cost == std::vector<Cost>{2, 1, 0});
}

TEST_CASE("height bound zero scans only the root") {
  const Graph g = abc_path();
  const SpTree t = dijkstra_tree(g, 0, Direction::kForward, 0);
  CHECK(t.scanned[0]);
  CHECK_FALSE(t.scanned[1]);
  CHECK_FALSE(t.scanned[2]);
  CHECK(t.cost[1] == kInfCost);
}

TEST_CASE("dijkstra matches Bellman-Ford on a 500-vertex graph") {
  const Graph g = perturb_costs(testing::geometric_graph({.vertices = 500, .seed = 21}), {});
  for (VertexId root : testing::random_vertices(g.num_vertices(), 5, 3)) {
    const SpTree f = dijkstra_tree(g, root, Direction::kForward);
    CHECK(f.cost == bellman_ford(g, root));
    const SpTree b = dijkstra_tree(g, root, Direction::kBackward);
    CHECK(b.cost == bellman_ford(g.reversed(), root));
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      VertexId u = v;
      while (f.parent[u] != kNoVertex) {
        CHECK(f.cost[f.parent[u]] < f.cost[u]);
        u = f.parent[u];
      }
      CHECK(u == root);
    }
  }
}

TEST_CASE("bounded trees never scan beyond the bound") {
  const Graph g = testing::geometric_graph({.vertices = 200, .seed = 5});
  const SpTree t = dijkstra_tree(g, 3, Direction::kForward, 250.0);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (t.scanned[v]) CHECK(t.cost[v] <= 250.0);
  }
}

TEST_CASE("exact reach on small hand graphs") {
  const Graph g = abc_path();
  CHECK(exact_reach(g, 1) == 1);
  CHECK(exact_reach(g, 0) == 0);
  CHECK(exact_reach(g, 2) == 0);
  CHECK(exact_reaches(g) == std::vector<Cost>{0, 1, 0});
}

TEST_CASE("exact reach of the centre of a 5x5 unit grid") {
  const Graph g = testing::grid_graph(5, 5);
  const auto d = testing::floyd_warshall(g);
  const VertexId centre = 12;
  const Cost expected = reach_from_all_pairs(d, centre);
  CHECK(expected == 4);
  CHECK(exact_reach(g, centre) == expected);
  const auto all = exact_reaches(g);
  for (VertexId v = 0; v < g.num_vertices(); ++v) CHECK(all[v] == reach_from_all_pairs(d, v));
}

TEST_CASE("star leaves have bound zero and cap zero disables shortcuts") {
  std::istringstream in("from\tto\tcost\tbidir\nX\tA\t1\t1\nX\tB\t2\t1\nX\tC\t3\t1\n");
  const Graph g = load_graph(in).graph;
  const ReachIndex idx = compute_reach_bounds(g, {});
  CHECK(idx.bound[*g.find("A")] == 0);
  CHECK(idx.bound[*g.find("B")] == 0);
  CHECK(idx.bound[*g.find("C")] == 0);
  CHECK(idx.shortcuts.empty());
}

TEST_CASE("reach bounds dominate all-pairs reach, exact and iterative") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Graph g = perturb_costs(testing::geometric_graph({.vertices = 200, .seed = seed}), {});
    const auto d = testing::floyd_warshall(g);
    ReachOptions exact;
    ReachOptions iterative;
    iterative.exact_limit = 10;
    const ReachIndex a = compute_reach_bounds(g, exact);
    const ReachIndex b = compute_reach_bounds(g, iterative);
    for (VertexId v = 0; v < g.num_vertices(); ++v) {
      const Cost r = reach_from_all_pairs(d, v);
      CHECK(a.bound[v] >= r * (1 - 1e-12));
      CHECK(b.bound[v] >= r * (1 - 1e-12));
    }
  }
}

TEST_CASE("shortcuts cover whole chains and respect the cap") {
  const Graph g = testing::chain_grid(4, 4, 4, 3);
  ReachOptions opts;
  opts.cap = 5.0;
  const ReachIndex idx = compute_reach_bounds(g, opts);
  CHECK_FALSE(idx.shortcuts.empty());
  for (const Shortcut& s : idx.shortcuts) {
    std::vector<VertexId> seq{s.tail};
    seq.insert(seq.end(), s.bypassed.begin(), s.bypassed.end());
    seq.push_back(s.head);
    Cost sum = 0;
    for (std::size_t i = 1; i < seq.size(); ++i) sum += g.edge(*g.find_edge(seq[i - 1], seq[i])).cost;
    CHECK(s.cost == doctest::Approx(sum).epsilon(1e-12));
    CHECK(s.cost <= opts.cap);
    CHECK(s.bypassed.size() == 3);
  }
}

TEST_CASE("reach queries equal plain Dijkstra") {
  const std::vector<Graph> graphs{
      perturb_costs(testing::geometric_graph({.vertices = 300, .seed = 8}), {}),
      perturb_costs(testing::chain_grid(6, 6, 3, 4), {}),
  };
  for (const Graph& g : graphs) {
    ReachOptions opts;
    opts.cap = 6.0;
    const ReachIndex idx = compute_reach_bounds(g, opts);
    ReachQuery with(g, idx, true);
    ReachQuery without(g, idx, false);
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(g.num_vertices() - 1));
    std::vector<std::vector<Cost>> rows(g.num_vertices());
    int mismatches = 0;
    for (int q = 0; q < 1000; ++q) {
      const VertexId u = pick(rng);
      const VertexId w = pick(rng);
      if (rows[u].empty()) rows[u] = dijkstra_tree(g, u, Direction::kForward).cost;
      mismatches += with.distance(u, w) != rows[u][w];
      mismatches += without.distance(u, w) != rows[u][w];
    }
    CHECK(mismatches == 0);
    CHECK(with.stats().queries == 1000);
  }
}

TEST_CASE("reach query identities") {
  const Graph g = abc_path();
  const ReachIndex idx = compute_reach_bounds(g, {});
  CHECK(re_distance(g, idx, 0, 2) == 2);
  CHECK(re_distance(g, idx, 1, 1) == 0);
  CHECK(re_distance(g, idx, 2, 0) == kInfCost);
}

TEST_CASE("distance matrix aggregates") {
  const Graph g = abc_path();
  const std::vector<VertexId> a{0};
  const DistanceMatrix self = od_distance_matrix(g, a, a);
  CHECK(self.at(0, 0) == 0);
  CHECK(self.origin_max[0] == 0);
  CHECK(self.origin_min[0] == 0);
  const std::vector<VertexId> bc{1, 2};
  const DistanceMatrix m = od_distance_matrix(g, a, bc);
  CHECK(m.at(0, 0) == 1);
  CHECK(m.at(0, 1) == 2);
  CHECK(m.origin_max[0] == 2);
  CHECK(m.origin_min[0] == 1);
  const std::vector<VertexId> c{2};
  const DistanceMatrix back = od_distance_matrix(g, c, a);
  CHECK(back.at(0, 0) == kInfCost);
}

TEST_CASE("index round trip") {
  const Graph g = testing::chain_grid(3, 3, 3, 2);
  ReachOptions opts;
  opts.cap = 10;
  const ReachIndex idx = compute_reach_bounds(g, opts);
  IndexKey key;
  key.graph_hash = 42;
  key.perturbation = 1e-9;
  key.trimmed = true;
  key.trim_keep = {"a", "b"};
  key.num_vertices = g.num_vertices();
  std::stringstream buf;
  save_index(buf, key, idx);
  const LoadedIndex back = load_index(buf);
  CHECK(back.key == key);
  CHECK(back.index.bound == idx.bound);
  CHECK(back.index.cap == idx.cap);
  REQUIRE(back.index.shortcuts.size() == idx.shortcuts.size());
  for (std::size_t i = 0; i < idx.shortcuts.size(); ++i) {
    CHECK(back.index.shortcuts[i].bypassed == idx.shortcuts[i].bypassed);
    CHECK(back.index.shortcuts[i].cost == idx.shortcuts[i].cost);
  }
  std::stringstream junk("not an index");
  CHECK_THROWS_AS(load_index(junk), InputError);
}
