#include "revc/oracle.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace revc {

OracleTree oracle_tree(const Graph& g, VertexId root, Direction direction) {
  const std::size_t n = g.num_vertices();
  OracleTree t;
  t.cost.assign(n, kInfCost);
  t.parent.assign(n, kNoVertex);
  std::vector<char> done(n, 0);
  using Item = std::pair<Cost, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  t.cost[root] = 0;
  pq.emplace(0, root);
  while (!pq.empty()) {
    const auto [c, v] = pq.top();
    pq.pop();
    if (done[v]) continue;
    done[v] = 1;
    for (EdgeId e : g.adjacent(v, direction)) {
      const VertexId w = g.far_end(e, direction);
      const Cost nc = c + g.edge(e).cost;
      if (nc < t.cost[w]) {
        t.cost[w] = nc;
        t.parent[w] = v;
        pq.emplace(nc, w);
      }
    }
  }
  return t;
}

Cost DistanceTable::distance(VertexId from, VertexId to) {
  auto it = rows_.find(from);
  if (it == rows_.end()) it = rows_.emplace(from, oracle_tree(*g_, from, Direction::kForward).cost).first;
  return it->second[to];
}

std::vector<OracleRoute> enumerate_via_paths(const Graph& g, VertexId s, VertexId t) {
  const OracleTree fwd = oracle_tree(g, s, Direction::kForward);
  const OracleTree bwd = oracle_tree(g, t, Direction::kBackward);
  std::map<std::vector<VertexId>, OracleRoute> by_sequence;
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (fwd.cost[v] == kInfCost || bwd.cost[v] == kInfCost) continue;
    std::vector<VertexId> seq;
    for (VertexId u = v; u != kNoVertex; u = fwd.parent[u]) seq.push_back(u);
    std::reverse(seq.begin(), seq.end());
    for (VertexId u = bwd.parent[v]; u != kNoVertex; u = bwd.parent[u]) seq.push_back(u);
    if (by_sequence.count(seq)) continue;
    OracleRoute r;
    r.origin = s;
    r.via = v;
    r.dest = t;
    r.length = fwd.cost[v] + bwd.cost[v];
    r.vertices = seq;
    by_sequence.emplace(std::move(seq), std::move(r));
  }
  std::vector<OracleRoute> out;
  for (auto& [seq, r] : by_sequence) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(), [](const OracleRoute& a, const OracleRoute& b) {
    return std::tie(a.length, a.vertices) < std::tie(b.length, b.vertices);
  });
  return out;
}

Cost path_length(const Graph& g, std::span<const VertexId> vertices) {
  Cost total = 0;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    auto e = g.find_edge(vertices[i - 1], vertices[i]);
    if (!e) return kInfCost;
    total += g.edge(*e).cost;
  }
  return total;
}

double local_optimality_factor(const Graph& g, std::span<const VertexId> vertices, DistanceTable& table,
                               double rel_tol) {
  const std::size_t k = vertices.size();
  std::vector<Cost> prefix(k, 0);
  for (std::size_t i = 1; i < k; ++i) {
    prefix[i] = prefix[i - 1] + g.edge(*g.find_edge(vertices[i - 1], vertices[i])).cost;
  }
  const Cost total = k ? prefix[k - 1] : 0;
  if (total <= 0) return 1.0;
  Cost worst = kInfCost;  // shortest interior among non-shortest subpaths
  for (std::size_t i = 0; i + 1 < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const Cost interior = j >= i + 2 ? prefix[j - 1] - prefix[i + 1] : 0;
      if (interior >= worst) break;
      const Cost along = prefix[j] - prefix[i];
      if (strictly_less(table.distance(vertices[i], vertices[j]), along, rel_tol)) worst = interior;
    }
  }
  return std::min(1.0, worst / total);
}

std::vector<OracleRoute> oracle_admissible(const Graph& g, VertexId s, VertexId t, double alpha, double beta,
                                           DistanceTable& table, double rel_tol) {
  std::vector<OracleRoute> out;
  if (s == t) return out;
  const Cost d = table.distance(s, t);
  if (d == kInfCost) return out;
  for (auto& r : enumerate_via_paths(g, s, t)) {
    if (r.length > beta * d * (1 + rel_tol)) continue;
    r.exact_factor = local_optimality_factor(g, r.vertices, table, rel_tol);
    if (r.exact_factor >= alpha * (1 - rel_tol)) out.push_back(std::move(r));
  }
  return out;
}

bool edge_represented(const Graph& g, const OracleRoute& route, const OracleTree& from_s, const OracleTree& to_t) {
  (void)g;
  const auto& seq = route.vertices;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const VertexId a = seq[i];
    const VertexId b = seq[i + 1];
    if (from_s.parent[b] != a || to_t.parent[a] != b) continue;
    std::vector<VertexId> via_a;
    for (VertexId u = a; u != kNoVertex; u = from_s.parent[u]) via_a.push_back(u);
    std::reverse(via_a.begin(), via_a.end());
    for (VertexId u = to_t.parent[a]; u != kNoVertex; u = to_t.parent[u]) via_a.push_back(u);
    if (via_a == seq) return true;
  }
  return false;
}

SandwichReport compare_with_oracle(const Graph& g, std::span<const SandwichPair> pairs, double alpha, double beta,
                                   double gamma, double delta, double rel_tol) {
  SandwichReport rep;
  DistanceTable table(g);
  for (const auto& p : pairs) {
    const Cost d = table.distance(p.origin, p.dest);
    std::set<std::vector<VertexId>> returned(p.returned.begin(), p.returned.end());
    rep.returned += p.returned.size();
    for (const auto& seq : p.returned) {
      const Cost len = path_length(g, seq);
      const double f = local_optimality_factor(g, seq, table, rel_tol);
      const bool ok = seq.size() >= 2 && seq.front() == p.origin && seq.back() == p.dest &&
                      len <= beta * d * (1 + rel_tol) && f >= alpha * gamma * (1 - rel_tol);
      if (!ok) {
        ++rep.spurious;
        rep.spurious_routes.push_back(seq);
      }
    }
    if (p.origin == p.dest || d == kInfCost) continue;
    const OracleTree from_s = oracle_tree(g, p.origin, Direction::kForward);
    const OracleTree to_t = oracle_tree(g, p.dest, Direction::kBackward);
    std::set<std::vector<VertexId>> represented;
    for (const auto& r : oracle_admissible(g, p.origin, p.dest, alpha, beta, table, rel_tol)) {
      ++rep.admissible;
      const bool rep_ok = edge_represented(g, r, from_s, to_t);
      if (rep_ok) represented.insert(r.vertices);
      if (r.exact_factor < alpha * delta * (1 + rel_tol)) continue;
      ++rep.strong;
      if (!rep_ok) {
        ++rep.unrepresented;
      } else if (!returned.count(r.vertices)) {
        ++rep.missing;
        rep.missing_routes.push_back(r.vertices);
      }
    }
    for (const auto& seq : returned) {
      if (!represented.count(seq)) ++rep.exact_mismatch;
    }
    for (const auto& seq : represented) {
      if (!returned.count(seq)) ++rep.exact_mismatch;
    }
  }
  return rep;
}

}  // namespace revc
