#include "revc/reach.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "revc/parallel.hpp"
#include "revc/sp_engine.hpp"

namespace revc {

namespace {

// Shortest-path DAG from one root, truncated at `radius`, folded into
// per-vertex reach contributions min(d(root, v), height of v in the DAG).
class DagReach {
 public:
  explicit DagReach(std::size_t n) : dist_(n, kInfCost), height_(n, 0), pos_(n, 0) {}

  // Returns true if the search stopped at the radius with vertices left.
  bool run(const Graph& g, VertexId root, Cost radius, double rel_tol, std::vector<Cost>& best,
           std::uint64_t& work) {
    for (VertexId v : touched_) dist_[v] = kInfCost;
    touched_.clear();
    order_.clear();
    done_.resize(g.num_vertices(), 0);
    MinHeap heap;
    dist_[root] = 0;
    touched_.push_back(root);
    heap.push({0, root});
    bool truncated = false;
    while (!heap.empty()) {
      const auto [c, v] = heap.top();
      if (c > radius) {
        truncated = true;
        break;
      }
      heap.pop();
      if (done_[v] || c > dist_[v]) continue;
      done_[v] = 1;
      pos_[v] = static_cast<std::uint32_t>(order_.size());
      order_.push_back(v);
      for (EdgeId e : g.out_edges(v)) {
        const VertexId w = g.edge(e).head;
        const Cost nc = c + g.edge(e).cost;
        if (nc < dist_[w]) {
          if (dist_[w] == kInfCost) touched_.push_back(w);
          dist_[w] = nc;
          heap.push({nc, w});
        }
      }
    }
    work += order_.size();

    for (VertexId v : order_) height_[v] = 0;
    // Zero-cost edges can point backwards in settlement order; repeat the
    // sweep until heights are stable in that case.
    bool again = true;
    while (again) {
      again = false;
      bool backward = false;
      for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
        const VertexId v = *it;
        for (EdgeId e : g.out_edges(v)) {
          const VertexId w = g.edge(e).head;
          if (!done_[w]) continue;
          const Cost c = g.edge(e).cost;
          if (dist_[v] + c > dist_[w] * (1 + rel_tol)) continue;
          if (pos_[w] <= pos_[v]) backward = true;
          const Cost h = height_[w] + c;
          if (h > height_[v]) {
            height_[v] = h;
            if (backward) again = true;
          }
        }
      }
    }
    for (VertexId v : order_) {
      best[v] = std::max(best[v], std::min(dist_[v], height_[v]));
      done_[v] = 0;
    }
    return truncated;
  }

 private:
  std::vector<Cost> dist_;
  std::vector<Cost> height_;
  std::vector<std::uint32_t> pos_;
  std::vector<VertexId> order_;
  std::vector<VertexId> touched_;
  std::vector<char> done_;
};

// Runs DagReach from every root, reducing with max. Per-chunk slots keep the
// result independent of scheduling.
struct RoundResult {
  std::vector<Cost> best;
  bool truncated = false;
  std::uint64_t work = 0;
};

RoundResult reach_round(const Graph& g, Cost radius, unsigned threads, double rel_tol) {
  const std::size_t n = g.num_vertices();
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(n, std::max(1u, threads) * 4));
  std::vector<RoundResult> parts(chunks);
  parallel_for(chunks, threads, [&](std::size_t ci) {
    RoundResult& part = parts[ci];
    part.best.assign(n, 0);
    DagReach dag(n);
    for (std::size_t r = ci; r < n; r += chunks) {
      if (dag.run(g, static_cast<VertexId>(r), radius, rel_tol, part.best, part.work)) part.truncated = true;
    }
  });
  RoundResult out;
  out.best.assign(n, 0);
  for (const auto& part : parts) {
    for (std::size_t v = 0; v < n; ++v) out.best[v] = std::max(out.best[v], part.best[v]);
    out.truncated = out.truncated || part.truncated;
    out.work += part.work;
  }
  return out;
}

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}
void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw InputError("truncated index file");
  return value;
}
std::string get_string(std::istream& in) {
  const auto len = get<std::uint64_t>(in);
  if (len > (1ULL << 30)) throw InputError("corrupt index file");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw InputError("truncated index file");
  return s;
}

constexpr char kMagic[8] = {'R', 'E', 'V', 'C', 'I', 'D', 'X', '1'};

}  // namespace

Cost exact_reach(const Graph& g, VertexId v, double rel_tol) {
  const std::size_t n = g.num_vertices();
  const SpTree from_v = dijkstra_tree(g, v, Direction::kForward);
  const SpTree to_v = dijkstra_tree(g, v, Direction::kBackward);
  Cost reach = 0;
  for (VertexId u = 0; u < n; ++u) {
    if (u == v || to_v.cost[u] == kInfCost) continue;
    const SpTree from_u = dijkstra_tree(g, u, Direction::kForward);
    for (VertexId w = 0; w < n; ++w) {
      if (w == v || from_v.cost[w] == kInfCost) continue;
      const Cost through = to_v.cost[u] + from_v.cost[w];
      if (through <= from_u.cost[w] * (1 + rel_tol)) {
        reach = std::max(reach, std::min(to_v.cost[u], from_v.cost[w]));
      }
    }
  }
  return reach;
}

std::vector<Cost> exact_reaches(const Graph& g, unsigned threads, double rel_tol) {
  return reach_round(g, kInfCost, threads, rel_tol).best;
}

std::vector<Shortcut> chain_shortcuts(const Graph& g, Cost cap) {
  std::vector<Shortcut> out;
  if (!(cap > 0)) return out;
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<VertexId>> nbrs(n);
  for (const auto& e : g.edges()) {
    nbrs[e.tail].push_back(e.head);
    nbrs[e.head].push_back(e.tail);
  }
  for (auto& list : nbrs) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  auto inner = [&](VertexId v) { return nbrs[v].size() == 2; };

  for (VertexId a = 0; a < n; ++a) {
    if (inner(a)) continue;
    for (VertexId first : nbrs[a]) {
      if (!inner(first)) continue;
      std::vector<VertexId> chain;
      VertexId prev = a;
      VertexId cur = first;
      while (inner(cur) && cur != a) {
        chain.push_back(cur);
        const VertexId next = nbrs[cur][0] == prev ? nbrs[cur][1] : nbrs[cur][0];
        prev = cur;
        cur = next;
      }
      const VertexId z = cur;
      if (z == a) continue;
      Cost total = 0;
      bool ok = true;
      VertexId tail = a;
      for (std::size_t i = 0; i <= chain.size() && ok; ++i) {
        const VertexId head = i < chain.size() ? chain[i] : z;
        auto e = g.find_edge(tail, head);
        if (!e) {
          ok = false;
        } else {
          total += g.edge(*e).cost;
        }
        tail = head;
      }
      if (ok && total <= cap) out.push_back({a, z, total, std::move(chain)});
    }
  }
  return out;
}

ReachIndex compute_reach_bounds(const Graph& g, const ReachOptions& opts) {
  const std::size_t n = g.num_vertices();
  ReachIndex idx;
  idx.cap = opts.cap;
  if (n <= opts.exact_limit || g.num_edges() == 0) {
    idx.bound = exact_reaches(g, opts.threads);
  } else {
    std::vector<Cost> costs;
    costs.reserve(g.num_edges());
    Cost cmax = 0;
    for (const auto& e : g.edges()) {
      if (e.cost > 0) costs.push_back(e.cost);
      cmax = std::max(cmax, e.cost);
    }
    idx.bound.assign(n, kInfCost);
    if (costs.empty()) {
      // Every path has length 0, hence every reach is 0.
      idx.bound.assign(n, 0);
    } else {
      std::nth_element(costs.begin(), costs.begin() + costs.size() / 2, costs.end());
      Cost eps = costs[costs.size() / 2];
      std::vector<char> certified(n, 0);
      std::size_t remaining = n;
      std::uint64_t work = 0;
      for (int round = 0; round < opts.max_rounds && remaining > 0; ++round) {
        const Cost radius = 2 * eps + 2 * cmax;
        const RoundResult r = reach_round(g, radius, opts.threads, kDefaultRelTol);
        work += r.work;
        for (std::size_t v = 0; v < n; ++v) {
          // Untruncated trees see every shortest path, so all values are exact.
          if (!certified[v] && (r.best[v] < eps || !r.truncated)) {
            idx.bound[v] = r.best[v];
            certified[v] = 1;
            --remaining;
          }
        }
        if (work > opts.work_limit) break;
        eps *= 2;
      }
    }
  }
  idx.shortcuts = chain_shortcuts(g, opts.cap);
  idx.link();
  return idx;
}

Cost DistanceMatrix::mean_finite() const {
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < origins.size(); ++i) {
    for (std::size_t j = 0; j < destinations.size(); ++j) {
      if (origins[i] == destinations[j]) continue;
      const Cost d = at(i, j);
      if (d == kInfCost) continue;
      sum += d;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0;
}

void DistanceMatrix::refresh_aggregates() {
  origin_max.assign(origins.size(), 0);
  origin_min.assign(origins.size(), 0);
  dest_max.assign(destinations.size(), 0);
  dest_min.assign(destinations.size(), 0);
  std::vector<char> origin_seen(origins.size(), 0), dest_seen(destinations.size(), 0);
  for (std::size_t i = 0; i < origins.size(); ++i) {
    for (std::size_t j = 0; j < destinations.size(); ++j) {
      const Cost d = at(i, j);
      if (d == kInfCost) continue;
      if (!origin_seen[i]) {
        origin_max[i] = origin_min[i] = d;
        origin_seen[i] = 1;
      } else {
        origin_max[i] = std::max(origin_max[i], d);
        origin_min[i] = std::min(origin_min[i], d);
      }
      if (!dest_seen[j]) {
        dest_max[j] = dest_min[j] = d;
        dest_seen[j] = 1;
      } else {
        dest_max[j] = std::max(dest_max[j], d);
        dest_min[j] = std::min(dest_min[j], d);
      }
    }
  }
}

DistanceMatrix od_distance_matrix(const Graph& g, std::span<const VertexId> origins,
                                  std::span<const VertexId> destinations, unsigned threads) {
  DistanceMatrix m;
  m.origins.assign(origins.begin(), origins.end());
  m.destinations.assign(destinations.begin(), destinations.end());
  const std::size_t no = origins.size();
  const std::size_t nd = destinations.size();
  m.dist.assign(no * nd, kInfCost);
  if (nd < no) {
    parallel_for(nd, threads, [&](std::size_t j) {
      const SpTree t = dijkstra_tree(g, destinations[j], Direction::kBackward);
      for (std::size_t i = 0; i < no; ++i) m.dist[i * nd + j] = t.cost[origins[i]];
    });
  } else {
    parallel_for(no, threads, [&](std::size_t i) {
      const SpTree t = dijkstra_tree(g, origins[i], Direction::kForward);
      for (std::size_t j = 0; j < nd; ++j) m.dist[i * nd + j] = t.cost[destinations[j]];
    });
  }
  m.refresh_aggregates();
  return m;
}

void save_index(std::ostream& out, const IndexKey& key, const ReachIndex& idx) {
  out.write(kMagic, sizeof kMagic);
  put(out, key.graph_hash);
  put(out, key.perturbation);
  put(out, key.seed);
  put<std::uint8_t>(out, key.trimmed ? 1 : 0);
  put<std::uint64_t>(out, key.trim_keep.size());
  for (const auto& s : key.trim_keep) put_string(out, s);
  put(out, key.num_vertices);
  put(out, idx.cap);
  put<std::uint64_t>(out, idx.bound.size());
  for (Cost b : idx.bound) put(out, b);
  put<std::uint64_t>(out, idx.shortcuts.size());
  for (const auto& sc : idx.shortcuts) {
    put(out, sc.tail);
    put(out, sc.head);
    put(out, sc.cost);
    put<std::uint64_t>(out, sc.bypassed.size());
    for (VertexId v : sc.bypassed) put(out, v);
  }
}

void save_index_file(const std::string& path, const IndexKey& key, const ReachIndex& idx) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write index file '" + path + "'");
  save_index(out, key, idx);
  if (!out) throw InputError("failed writing index file '" + path + "'");
}

LoadedIndex load_index(std::istream& in) {
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw InputError("not a reach index file");
  LoadedIndex li;
  li.key.graph_hash = get<std::uint64_t>(in);
  li.key.perturbation = get<double>(in);
  li.key.seed = get<std::uint64_t>(in);
  li.key.trimmed = get<std::uint8_t>(in) != 0;
  const auto keep = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < keep; ++i) li.key.trim_keep.push_back(get_string(in));
  li.key.num_vertices = get<std::uint64_t>(in);
  li.index.cap = get<Cost>(in);
  const auto n = get<std::uint64_t>(in);
  if (n != li.key.num_vertices) throw InputError("corrupt index file");
  li.index.bound.resize(n);
  for (auto& b : li.index.bound) b = get<Cost>(in);
  const auto ns = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < ns; ++i) {
    Shortcut sc;
    sc.tail = get<VertexId>(in);
    sc.head = get<VertexId>(in);
    sc.cost = get<Cost>(in);
    const auto len = get<std::uint64_t>(in);
    if (len > n) throw InputError("corrupt index file");
    for (std::uint64_t k = 0; k < len; ++k) sc.bypassed.push_back(get<VertexId>(in));
    if (sc.tail >= n || sc.head >= n) throw InputError("corrupt index file");
    li.index.shortcuts.push_back(std::move(sc));
  }
  li.index.link();
  return li;
}

LoadedIndex load_index_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open index file '" + path + "'");
  return load_index(in);
}

}  // namespace revc
