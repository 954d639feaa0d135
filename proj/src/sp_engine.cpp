#include "revc/sp_engine.hpp"

#include <algorithm>

namespace revc {

std::vector<VertexId> SpTree::chain_to_root(VertexId v) const {
  std::vector<VertexId> out;
  if (v >= scanned.size() || !scanned[v]) return out;
  for (VertexId x = v; x != kNoVertex; x = parent[x]) out.push_back(x);
  return out;
}

SpTree dijkstra_tree(const Graph& g, VertexId root, Direction direction, Cost height_bound) {
  const std::size_t n = g.num_vertices();
  SpTree t;
  t.root = root;
  t.direction = direction;
  t.height_bound = height_bound;
  t.cost.assign(n, kInfCost);
  t.parent.assign(n, kNoVertex);
  t.parent_edge.assign(n, kNoEdge);
  t.scanned.assign(n, 0);

  MinHeap heap;
  t.cost[root] = 0;
  heap.push({0, root});
  while (!heap.empty()) {
    const auto [c, v] = heap.top();
    if (c > height_bound) break;
    heap.pop();
    if (t.scanned[v] || c > t.cost[v]) continue;
    t.scanned[v] = 1;
    for (EdgeId e : g.adjacent(v, direction)) {
      const VertexId w = g.far_end(e, direction);
      const Cost nc = c + g.edge(e).cost;
      if (nc < t.cost[w]) {
        t.cost[w] = nc;
        t.parent[w] = v;
        t.parent_edge[w] = e;
        heap.push({nc, w});
      }
    }
  }
  // Labels beyond the bound are tentative; drop them so `cost` only holds
  // settled distances.
  for (std::size_t v = 0; v < n; ++v) {
    if (!t.scanned[v]) {
      t.cost[v] = kInfCost;
      t.parent[v] = kNoVertex;
      t.parent_edge[v] = kNoEdge;
    }
  }
  return t;
}

ReachQuery::ReachQuery(const Graph& g, const ReachIndex& idx, bool use_shortcuts)
    : graph_(&g), index_(&idx), use_shortcuts_(use_shortcuts) {
  for (auto& s : sides_) {
    s.dist.assign(g.num_vertices(), kInfCost);
    s.stamp.assign(g.num_vertices(), 0);
    s.settled.assign(g.num_vertices(), 0);
    s.pred.assign(g.num_vertices(), kNoVertex);
    s.step.assign(g.num_vertices(), 0);
  }
}

Cost ReachQuery::distance(VertexId from, VertexId to) {
  ++stats_.queries;
  if (from == to) return 0;
  if (++epoch_ == 0) {
    for (auto& s : sides_) {
      std::fill(s.stamp.begin(), s.stamp.end(), 0);
      std::fill(s.settled.begin(), s.settled.end(), 0);
    }
    epoch_ = 1;
  }
  for (auto& s : sides_) s.heap = MinHeap{};

  const Graph& g = *graph_;
  const ReachIndex& idx = *index_;
  Cost mu = kInfCost;
  VertexId meet = kNoVertex;

  // `step` is the edge id, or num_edges + shortcut id, used to reach v.
  auto place = [&](int side, VertexId v, Cost c, VertexId pred, std::uint64_t step) {
    Side& s = sides_[side];
    if (s.stamp[v] == epoch_ && (s.settled[v] == epoch_ || c >= s.dist[v])) return;
    s.stamp[v] = epoch_;
    s.dist[v] = c;
    s.pred[v] = pred;
    s.step[v] = step;
    s.heap.push({c, v});
    const Cost other = label(sides_[1 - side], v);
    if (other < kInfCost && c + other < mu) {
      mu = c + other;
      meet = v;
    }
  };
  place(0, from, 0, kNoVertex, 0);
  place(1, to, 0, kNoVertex, 0);

  auto top = [&](int side) {
    auto& h = sides_[side].heap;
    while (!h.empty()) {
      const auto e = h.top();
      const Side& s = sides_[side];
      if (s.settled[e.vertex] == epoch_ || e.cost > s.dist[e.vertex]) {
        h.pop();
        continue;
      }
      return e.cost;
    }
    return kInfCost;
  };

  while (true) {
    const Cost kf = top(0);
    const Cost kb = top(1);
    const bool active_f = kf < kInfCost && !(kf > mu / 2);
    const bool active_b = kb < kInfCost && !(kb > mu / 2);
    if (!active_f && !active_b) break;
    const int side = (active_f && (!active_b || kf <= kb)) ? 0 : 1;
    const Direction dir = side == 0 ? Direction::kForward : Direction::kBackward;
    Side& s = sides_[side];
    const auto [c, x] = s.heap.top();
    s.heap.pop();
    s.settled[x] = epoch_;
    ++stats_.settled;

    const Cost radius_other = side == 0 ? kb : kf;
    if (idx.bound[x] < std::min(c, radius_other)) {
      ++stats_.pruned;
      continue;
    }
    for (EdgeId e : g.adjacent(x, dir)) place(side, g.far_end(e, dir), c + g.edge(e).cost, x, e);
    if (use_shortcuts_ && !idx.shortcuts.empty()) {
      const auto& ids = side == 0 ? idx.out_shortcuts[x] : idx.in_shortcuts[x];
      for (std::size_t i : ids) {
        const Shortcut& sc = idx.shortcuts[i];
        place(side, side == 0 ? sc.head : sc.tail, c + sc.cost, x, g.num_edges() + i);
      }
    }
  }
  return meet == kNoVertex ? kInfCost : path_cost(meet);
}

Cost ReachQuery::path_cost(VertexId meet) const {
  // Re-add the edge costs in path order, as a one-sided search would, so
  // results match plain Dijkstra bit for bit when the path is unique.
  const Graph& g = *graph_;
  std::vector<std::uint64_t> steps;
  for (VertexId v = meet; sides_[0].pred[v] != kNoVertex; v = sides_[0].pred[v]) steps.push_back(sides_[0].step[v]);
  std::reverse(steps.begin(), steps.end());
  for (VertexId v = meet; sides_[1].pred[v] != kNoVertex; v = sides_[1].pred[v]) steps.push_back(sides_[1].step[v]);
  Cost total = 0;
  for (std::uint64_t step : steps) {
    if (step < g.num_edges()) {
      total += g.edge(static_cast<EdgeId>(step)).cost;
      continue;
    }
    const Shortcut& sc = index_->shortcuts[step - g.num_edges()];
    VertexId prev = sc.tail;
    for (VertexId v : sc.bypassed) {
      total += g.edge(*g.find_edge(prev, v)).cost;
      prev = v;
    }
    total += g.edge(*g.find_edge(prev, sc.head)).cost;
  }
  return total;
}

Cost re_distance(const Graph& g, const ReachIndex& idx, VertexId from, VertexId to) {
  ReachQuery q(g, idx);
  return q.distance(from, to);
}

}  // namespace revc
