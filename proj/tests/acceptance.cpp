// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "revc/oracle.hpp"
#include "revc/pipeline.hpp"
#include "revc/reach.hpp"
#include "revc/sp_engine.hpp"
#include "revc/tree_growth.hpp"
#include "support/random_graph.hpp"

using namespace revc;

namespace {

using Clock = std::chrono::steady_clock;
using RouteSet = std::set<std::vector<VertexId>>;

struct Instance {
  Graph g;
  OdSet od;
  std::uint64_t seed = 0;
};

Instance make_instance(std::size_t n, std::size_t k, std::uint64_t seed) {
  Instance in;
  in.seed = seed;
  in.g = perturb_costs(testing::geometric_graph({.vertices = n, .seed = seed}), {.seed = seed});
  in.od = OdSet::cross(testing::random_vertices(n, k, seed * 7 + 1), testing::random_vertices(n, k, seed * 7 + 2));
  return in;
}

// 20 graphs of 100 to 290 vertices with five origins and five destinations.
const std::vector<Instance>& sandwich_graphs() {
  static const std::vector<Instance> graphs = [] {
    std::vector<Instance> out;
    for (std::uint64_t i = 0; i < 20; ++i) out.push_back(make_instance(100 + 10 * i, 5, 1000 + i));
    return out;
  }();
  return graphs;
}

Cost default_cap(const Instance& in) {
  const DistanceMatrix dm = od_distance_matrix(in.g, in.od.origins, in.od.destinations);
  return kDefaultCapFraction * dm.mean_finite();
}

RouteSet sequences(const RevcResult& r) {
  RouteSet out;
  for (const auto& route : r.routes) out.insert(route.vertices);
  return out;
}

std::vector<SandwichPair> sandwich_pairs(const Instance& in, const RevcResult& r) {
  std::vector<SandwichPair> pairs;
  for (const auto& [o, d] : in.od.pairs) {
    if (in.od.origins[o] == in.od.destinations[d]) continue;
    SandwichPair p{in.od.origins[o], in.od.destinations[d], {}};
    for (const auto& route : r.routes) {
      if (route.origin == o && route.dest == d) p.returned.push_back(route.vertices);
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::string jsonl(const Instance& in, const RevcResult& r) {
  std::ostringstream out;
  write_routes_jsonl(out, in.g, in.od, r.routes);
  return out.str();
}

std::uint64_t query_budget(double delta) {
  return 2 * static_cast<std::uint64_t>(std::ceil(1.0 / (delta - 1.0) - 1e-9));
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

// --- criteria ---------------------------------------------------------------

Verdict oracle_sandwich() {
  const auto start = Clock::now();
  std::size_t returned = 0, spurious = 0, missing = 0, unrepresented = 0, strong = 0;
  for (const Instance& in : sandwich_graphs()) {
    const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
    const RevcParams p;
    const RevcResult r = run_revc(in.g, idx, in.od, p);
    const SandwichReport rep = compare_with_oracle(in.g, sandwich_pairs(in, r), p.alpha, p.beta, p.gamma, p.delta);
    returned += rep.returned;
    spurious += rep.spurious;
    missing += rep.missing;
    unrepresented += rep.unrepresented;
    strong += rep.strong;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "returned %zu, strong %zu, spurious %zu, missing %zu, unrepresented %zu, %.1f s", returned, strong,
                spurious, missing, unrepresented, secs);
  return {spurious == 0 && missing == 0 && secs < 300, buf};
}

Verdict exact_equivalence() {
  std::size_t mismatch = 0, returned = 0, unrepresented = 0;
  for (const Instance& in : sandwich_graphs()) {
    const ReachIndex idx = compute_reach_bounds(in.g, {.cap = 0});
    RevcParams p;
    p.gamma = p.delta = 1.0;
    p.shortcut_cap = 0;
    const RevcResult r = run_revc(in.g, idx, in.od, p);
    const SandwichReport rep = compare_with_oracle(in.g, sandwich_pairs(in, r), p.alpha, p.beta, 1.0, 1.0);
    mismatch += rep.exact_mismatch;
    returned += rep.returned;
    unrepresented += rep.unrepresented;
  }
  return {mismatch == 0, "returned " + std::to_string(returned) + ", symmetric difference " +
                             std::to_string(mismatch) + ", unrepresented " + std::to_string(unrepresented)};
}

Verdict tree_completeness() {
  std::size_t routes = 0, covered = 0;
  for (const Instance& in : sandwich_graphs()) {
    const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
    const DistanceMatrix dm = od_distance_matrix(in.g, in.od.origins, in.od.destinations);
    const TreeGrowthResult trees = grow_all_trees(in.g, idx, dm, EndpointBounds::from(dm, 0.2, 1.5), {});
    DistanceTable table(in.g);
    for (const auto& [o, d] : in.od.pairs) {
      const VertexId s = in.od.origins[o], t = in.od.destinations[d];
      if (s == t) continue;
      for (const auto& route : oracle_admissible(in.g, s, t, 0.2, 1.5, table)) {
        ++routes;
        covered += std::any_of(route.vertices.begin(), route.vertices.end(), [&](VertexId v) {
          return trees.forward[o].contains(v) && trees.backward[d].contains(v);
        });
      }
    }
  }
  return {routes > 0 && covered == routes,
          std::to_string(covered) + " of " + std::to_string(routes) + " admissible routes covered"};
}

Verdict reach_soundness() {
  std::size_t violations = 0, checked = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const Instance in = make_instance(110 + 10 * i, 5, 2000 + i);
    const std::vector<Cost> exact = exact_reaches(in.g);
    // Exact mode and the iterative scheme, both with shortcuts.
    for (std::size_t limit : {std::size_t{2000}, std::size_t{0}}) {
      const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in), .exact_limit = limit});
      for (VertexId v = 0; v < in.g.num_vertices(); ++v) {
        ++checked;
        violations += idx.bound[v] < exact[v] * (1 - 1e-12);
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(checked) + " bounds"};
}

Verdict query_correctness() {
  std::size_t wrong = 0, queries = 0;
  for (const Instance& in : sandwich_graphs()) {
    const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
    std::mt19937_64 rng(in.seed);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(in.g.num_vertices() - 1));
    std::vector<SpTree> cache(in.g.num_vertices());
    for (int q = 0; q < 1000; ++q) {
      const VertexId s = pick(rng), t = pick(rng);
      if (cache[s].cost.empty()) cache[s] = dijkstra_tree(in.g, s, Direction::kForward);
      ++queries;
      wrong += re_distance(in.g, idx, s, t) != cache[s].cost[t];
    }
  }
  return {wrong == 0, std::to_string(wrong) + " of " + std::to_string(queries) + " queries differ"};
}

Verdict t_delta_budget() {
  std::string detail;
  bool pass = true;
  for (double delta : {1.1, 1.25, 1.5, 2.0}) {
    std::uint64_t worst = 0, tests = 0;
    for (const Instance& in : sandwich_graphs()) {
      const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
      RevcParams p;
      p.delta = delta;
      p.sp_cache = false;
      p.batch_lo = false;
      const RevcResult r = run_revc(in.g, idx, in.od, p);
      worst = std::max(worst, r.report.step4.max_queries_per_test);
      tests += r.report.step4.tests;
    }
    pass = pass && worst <= query_budget(delta) && tests > 0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%sdelta %.2f: max %llu of %llu", detail.empty() ? "" : "; ", delta,
                  static_cast<unsigned long long>(worst), static_cast<unsigned long long>(query_budget(delta)));
    detail += buf;
  }
  return {pass, detail};
}

Verdict trends() {
  const Instance in = make_instance(1000, 20, 77);
  const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
  auto per_pair = [&](double alpha, double beta) {
    RevcParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = p.delta = 1.0;
    return run_revc(in.g, idx, in.od, p).report.routes_per_pair;
  };
  std::string detail = "alpha";
  bool pass = true;
  double prev = 0;
  for (double alpha : {0.1, 0.2, 0.3, 0.5}) {
    const double v = per_pair(alpha, 1.5);
    if (alpha != 0.1) pass = pass && v < prev;
    prev = v;
    char buf[48];
    std::snprintf(buf, sizeof buf, " %.2f:%.3f", alpha, v);
    detail += buf;
  }
  detail += "; beta";
  for (double beta : {1.1, 1.5, 2.0}) {
    const double v = per_pair(0.2, beta);
    if (beta != 1.1) pass = pass && v > prev;
    prev = v;
    char buf[48];
    std::snprintf(buf, sizeof buf, " %.1f:%.3f", beta, v);
    detail += buf;
  }
  return {pass, detail};
}

Verdict batching_consistency() {
  std::size_t differ = 0, routes = 0;
  for (const Instance& in : sandwich_graphs()) {
    const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
    RevcParams p;
    p.gamma = 1.0;
    const RevcResult batched = run_revc(in.g, idx, in.od, p);
    p.batch_lo = false;
    const RevcResult single = run_revc(in.g, idx, in.od, p);
    differ += sequences(batched) != sequences(single);
    routes += batched.routes.size();
  }
  return {differ == 0, std::to_string(differ) + " of 20 graphs differ, " + std::to_string(routes) + " routes"};
}

Verdict thread_independence() {
  std::size_t differ = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance in = make_instance(400, 8, 3000 + seed);
    const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
    RevcParams p;
    const std::string one = jsonl(in, run_revc(in.g, idx, in.od, p));
    p.threads = 8;
    differ += jsonl(in, run_revc(in.g, idx, in.od, p)) != one;
  }
  return {differ == 0, std::to_string(differ) + " of 5 seeds differ"};
}

Verdict ablations() {
  struct Ablation {
    const char* flag;
    std::function<void(RevcParams&)> set;
    bool same_output;
  };
  const std::vector<Ablation> list = {
      {"--no-prune", [](RevcParams& p) { p.reach_prune = false; }, true},
      {"--no-dmin-prune", [](RevcParams& p) { p.dmin_prune = false; }, true},
      {"--naive-tree-bound", [](RevcParams& p) { p.naive_tree_bound = true; }, true},
      {"--no-dedup-neighbours", [](RevcParams& p) { p.dedup_neighbours = false; }, false},
      {"--no-dedup", [](RevcParams& p) { p.dedup = false; }, false},
      {"--no-batch-lo", [](RevcParams& p) { p.batch_lo = false; }, false},
      {"--no-sp-cache", [](RevcParams& p) { p.sp_cache = false; }, true},
  };
  bool pass = true;
  std::string detail;
  std::vector<double> base_time(1, 0), times(list.size(), 0);
  std::vector<std::size_t> mismatched(list.size(), 0);
  for (std::uint64_t i = 0; i < 5; ++i) {
    const Instance& in = sandwich_graphs()[i * 4];
    const ReachIndex idx = compute_reach_bounds(in.g, {.cap = default_cap(in)});
    const RevcResult base = run_revc(in.g, idx, in.od, {});
    base_time[0] += base.report.seconds.total;
    for (std::size_t a = 0; a < list.size(); ++a) {
      RevcParams p;
      list[a].set(p);
      const RevcResult r = run_revc(in.g, idx, in.od, p);
      times[a] += r.report.seconds.total;
      if (list[a].same_output) mismatched[a] += sequences(r) != sequences(base);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "baseline %.4f s", base_time[0]);
  detail = buf;
  for (std::size_t a = 0; a < list.size(); ++a) {
    std::snprintf(buf, sizeof buf, "; %s %.4f s%s", list[a].flag, times[a],
                  list[a].same_output ? (mismatched[a] ? " (output differs)" : " (same output)") : "");
    detail += buf;
    pass = pass && mismatched[a] == 0;
  }
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"oracle sandwich", oracle_sandwich},
      {"exact-mode equivalence", exact_equivalence},
      {"tree-bound completeness", tree_completeness},
      {"reach soundness", reach_soundness},
      {"reach query correctness", query_correctness},
      {"T-delta query budget", t_delta_budget},
      {"qualitative trends", trends},
      {"batching consistency", batching_consistency},
      {"thread-count independence", thread_independence},
      {"ablation harness", ablations},
  };
  int failed = 0;
  int n = 0;
  for (const Criterion& c : criteria) {
    const auto start = Clock::now();
    const Verdict v = c.run();
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", ++n, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
