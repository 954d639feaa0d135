#include "revc/tree_growth.hpp"

#include <algorithm>
#include <queue>

#include "revc/parallel.hpp"

namespace revc {

Cost tree_height_bound(double alpha, double beta, Cost m) {
  return std::max((1 - alpha) * beta * m, 0.5 * beta * m);
}

EndpointBounds EndpointBounds::from(const DistanceMatrix& dm, double alpha, double beta) {
  EndpointBounds b;
  b.origin_max = dm.origin_max;
  b.origin_min = dm.origin_min;
  b.dest_max = dm.dest_max;
  b.dest_min = dm.dest_min;
  b.alpha = alpha;
  b.beta = beta;
  return b;
}

namespace {

enum State : std::uint8_t { kUnseen, kLabelled, kGhostSettled, kIncluded };

struct Label {
  Cost cost;
  VertexId vertex;
  bool ghost;
  friend bool operator>(const Label& a, const Label& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    if (a.vertex != b.vertex) return a.vertex > b.vertex;
    return a.ghost > b.ghost;
  }
};

// Ghost budgets are compared against path sums that may round differently
// from the stored bounds.
constexpr double kBudgetSlack = 1e-9;

}  // namespace

// Labels come in two kinds. Real labels form the tree. Ghost labels carry
// paths through vertices that were not expanded; they never join the tree
// but keep worse real labels from settling, so every included vertex has an
// exact cost. A ghost's budget is how much farther it can matter: a shortest
// path through a vertex x with d(root, x) > reach(x) ends within reach(x)
// of x.
GrownTree grow_tree(const Graph& g, const std::vector<Cost>& bound, VertexId root, Direction direction,
                    Cost height, Cost nearest_partner, double alpha, const DMinMap* dmin, TreeStats* stats) {
  const std::size_t n = g.num_vertices();
  const bool second = dmin != nullptr;
  std::vector<Cost> cost(n, kInfCost);
  std::vector<Cost> budget(n, 0);
  std::vector<std::uint8_t> ghost(n, 0);
  std::vector<std::uint8_t> state(n, kUnseen);
  std::vector<VertexId> parent(n, kNoVertex);
  std::vector<EdgeId> parent_edge(n, kNoEdge);
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;
  std::size_t real_pending = 0;
  TreeStats local;

  auto passes = [&](VertexId x, Cost c) {
    if (bound[x] == kInfCost) return true;
    Cost rhs = std::min(c, 0.5 * alpha * std::max(c, nearest_partner));
    if (second) rhs = std::min(rhs, (*dmin)[x]);
    return bound[x] >= rhs;
  };

  auto ghost_label = [&](VertexId y, Cost nc, Cost b) {
    if (state[y] == kIncluded) return;
    if (nc < cost[y]) {
      if (state[y] == kLabelled && !ghost[y]) --real_pending;
      cost[y] = nc;
      ghost[y] = 1;
      budget[y] = b;
      parent[y] = kNoVertex;
      parent_edge[y] = kNoEdge;
      state[y] = kLabelled;
      heap.push({nc, y, true});
    } else if (nc == cost[y] && ghost[y] && b > budget[y]) {
      budget[y] = b;
      if (state[y] == kGhostSettled) {
        state[y] = kLabelled;
        heap.push({nc, y, true});
      }
    }
  };

  auto real_label = [&](VertexId y, Cost nc, VertexId x, EdgeId e) {
    if (state[y] == kIncluded) return;
    if (!(nc < cost[y] || (nc == cost[y] && ghost[y]))) return;
    if (second && !passes(y, nc)) {
      ghost_label(y, nc, bound[y]);
      return;
    }
    if (!(state[y] == kLabelled && !ghost[y])) ++real_pending;
    cost[y] = nc;
    ghost[y] = 0;
    parent[y] = x;
    parent_edge[y] = e;
    state[y] = kLabelled;
    heap.push({nc, y, false});
  };

  auto spread_ghosts = [&](VertexId x, Cost c, Cost b) {
    for (EdgeId e : g.adjacent(x, direction)) {
      const Cost ce = g.edge(e).cost;
      const Cost nb = b - ce;
      const Cost nc = c + ce;
      if (nb < -kBudgetSlack * nc) continue;
      ghost_label(g.far_end(e, direction), nc, nb);
    }
  };

  GrownTree tree;
  tree.root = root;
  tree.direction = direction;
  tree.height = height;

  cost[root] = 0;
  state[root] = kLabelled;
  real_pending = 1;
  heap.push({0, root, false});
  while (real_pending > 0 && !heap.empty()) {
    const Label top = heap.top();
    heap.pop();
    const VertexId x = top.vertex;
    const Cost c = top.cost;
    if (state[x] != kLabelled || c != cost[x] || top.ghost != static_cast<bool>(ghost[x])) continue;

    if (ghost[x]) {
      state[x] = kGhostSettled;
      ++local.ghost_settled;
      spread_ghosts(x, c, budget[x]);
      continue;
    }
    --real_pending;
    const Cost own_budget = bound[x] < c ? bound[x] : kInfCost;
    if (second && !passes(x, c)) {
      state[x] = kGhostSettled;
      ghost[x] = 1;
      budget[x] = own_budget;
      ++local.pruned;
      ++local.ghost_settled;
      spread_ghosts(x, c, own_budget);
      continue;
    }

    state[x] = kIncluded;
    ++local.included;
    tree.slot.emplace(x, static_cast<std::uint32_t>(tree.vertex.size()));
    tree.vertex.push_back(x);
    tree.cost.push_back(c);
    tree.parent.push_back(parent[x]);
    tree.parent_edge.push_back(parent_edge[x]);

    const bool within = c < height;
    const bool reach_ok = second || passes(x, c);
    if (within && reach_ok) {
      ++local.expanded;
      for (EdgeId e : g.adjacent(x, direction)) {
        real_label(g.far_end(e, direction), c + g.edge(e).cost, x, e);
      }
    } else {
      if (within) ++local.pruned;
      spread_ghosts(x, c, own_budget);
    }
  }
  if (stats) *stats += local;
  return tree;
}

PassResult grow_pass(const Graph& g, const ReachIndex& idx, std::span<const VertexId> roots, Direction direction,
                     const EndpointBounds& bounds, const TreeOptions& opts, const DMinMap* dmin) {
  const bool forward = direction == Direction::kForward;
  const auto& maxes = forward ? bounds.origin_max : bounds.dest_max;
  const auto& mins = forward ? bounds.origin_min : bounds.dest_min;

  std::vector<Cost> unbounded;
  if (!opts.reach_prune) unbounded.assign(g.num_vertices(), kInfCost);
  const std::vector<Cost>& bound = opts.reach_prune ? idx.bound : unbounded;
  // Without the nearest-partner distances the test can only prune
  // successors, exactly as in the first pass.
  if (!opts.dmin_prune) dmin = nullptr;

  PassResult out;
  out.trees.resize(roots.size());
  std::vector<TreeStats> stats(roots.size());
  parallel_for(roots.size(), opts.threads, [&](std::size_t i) {
    const Cost m = maxes[i];
    const Cost h = opts.naive_height ? bounds.beta * m : tree_height_bound(bounds.alpha, bounds.beta, m);
    out.trees[i] = grow_tree(g, bound, roots[i], direction, h, mins[i], bounds.alpha, dmin, &stats[i]);
  });
  for (const auto& s : stats) out.stats += s;
  return out;
}

PassResult grow_forward_trees(const Graph& g, const ReachIndex& idx, std::span<const VertexId> origins,
                              const EndpointBounds& bounds, const TreeOptions& opts, const DMinMap* dmin) {
  return grow_pass(g, idx, origins, Direction::kForward, bounds, opts, dmin);
}

PassResult grow_backward_trees(const Graph& g, const ReachIndex& idx, std::span<const VertexId> destinations,
                               const EndpointBounds& bounds, const TreeOptions& opts, const DMinMap* dmin) {
  return grow_pass(g, idx, destinations, Direction::kBackward, bounds, opts, dmin);
}

DMinMap build_dmin(std::size_t num_vertices, const std::vector<GrownTree>& trees) {
  DMinMap d(num_vertices, kInfCost);
  for (const auto& t : trees) {
    for (std::size_t i = 0; i < t.vertex.size(); ++i) d[t.vertex[i]] = std::min(d[t.vertex[i]], t.cost[i]);
  }
  return d;
}

Direction direction_order(std::size_t num_origins, std::size_t num_destinations) {
  return num_destinations < num_origins ? Direction::kBackward : Direction::kForward;
}

ScanRecord build_scan_record(std::size_t num_vertices, const std::vector<GrownTree>& forward,
                             const std::vector<GrownTree>& backward) {
  ScanRecord rec;
  rec.num_origins = forward.size();
  rec.num_destinations = backward.size();
  rec.origin_count.assign(num_vertices, 0);
  rec.dest_count.assign(num_vertices, 0);
  auto fill = [](const std::vector<GrownTree>& trees, std::unordered_map<EdgeId, EndpointSet>& scans,
                 std::vector<std::uint32_t>& count) {
    for (std::size_t i = 0; i < trees.size(); ++i) {
      const GrownTree& t = trees[i];
      for (std::size_t k = 0; k < t.vertex.size(); ++k) {
        ++count[t.vertex[k]];
        const EdgeId e = t.parent_edge[k];
        if (e == kNoEdge) continue;
        auto it = scans.find(e);
        if (it == scans.end()) it = scans.emplace(e, EndpointSet(trees.size())).first;
        it->second.set(i);
      }
    }
  };
  fill(forward, rec.origin_scans, rec.origin_count);
  fill(backward, rec.dest_scans, rec.dest_count);
  return rec;
}

TreeGrowthResult grow_all_trees(const Graph& g, const ReachIndex& idx, const DistanceMatrix& dm,
                                const EndpointBounds& bounds, const TreeOptions& opts) {
  TreeGrowthResult r;
  r.first = direction_order(dm.origins.size(), dm.destinations.size());
  if (r.first == Direction::kForward) {
    PassResult f = grow_forward_trees(g, idx, dm.origins, bounds, opts);
    r.dmin = build_dmin(g.num_vertices(), f.trees);
    PassResult b = grow_backward_trees(g, idx, dm.destinations, bounds, opts, &r.dmin);
    r.forward = std::move(f.trees);
    r.backward = std::move(b.trees);
    r.forward_stats = f.stats;
    r.backward_stats = b.stats;
  } else {
    PassResult b = grow_backward_trees(g, idx, dm.destinations, bounds, opts);
    r.dmin = build_dmin(g.num_vertices(), b.trees);
    PassResult f = grow_forward_trees(g, idx, dm.origins, bounds, opts, &r.dmin);
    r.forward = std::move(f.trees);
    r.backward = std::move(b.trees);
    r.forward_stats = f.stats;
    r.backward_stats = b.stats;
  }
  r.scans = build_scan_record(g.num_vertices(), r.forward, r.backward);
  return r;
}

}  // namespace revc
