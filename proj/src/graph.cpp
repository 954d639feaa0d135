#include "revc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace revc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string row_error(std::size_t row, const std::string& what) {
  std::ostringstream os;
  os << "line " << row << ": " << what;
  return os.str();
}

}  // namespace

Graph Graph::build(std::vector<std::string> labels, std::vector<Edge> edges) {
  Graph g;
  g.labels_ = std::move(labels);
  for (VertexId v = 0; v < g.labels_.size(); ++v) {
    if (!g.label_index_.emplace(g.labels_[v], v).second) {
      throw InputError("duplicate vertex label '" + g.labels_[v] + "'");
    }
  }
  for (const auto& e : edges) {
    if (e.tail >= g.labels_.size() || e.head >= g.labels_.size()) {
      throw InputError("edge endpoint out of range");
    }
    if (e.tail == e.head) throw InputError("self-loop at '" + g.labels_[e.tail] + "'");
    if (!std::isfinite(e.cost) || e.cost < 0) {
      throw InputError("edge cost must be finite and non-negative");
    }
  }
  g.edges_ = std::move(edges);
  g.index();
  return g;
}

void Graph::index() {
  const std::size_t n = labels_.size();
  out_offset_.assign(n + 1, 0);
  in_offset_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++out_offset_[e.tail + 1];
    ++in_offset_[e.head + 1];
  }
  for (std::size_t v = 0; v < n; ++v) {
    out_offset_[v + 1] += out_offset_[v];
    in_offset_[v + 1] += in_offset_[v];
  }
  out_ids_.assign(edges_.size(), kNoEdge);
  in_ids_.assign(edges_.size(), kNoEdge);
  std::vector<std::size_t> out_fill(out_offset_.begin(), out_offset_.end() - 1);
  std::vector<std::size_t> in_fill(in_offset_.begin(), in_offset_.end() - 1);
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    out_ids_[out_fill[edges_[e].tail]++] = e;
    in_ids_[in_fill[edges_[e].head]++] = e;
  }
}

std::optional<VertexId> Graph::find(std::string_view label) const {
  auto it = label_index_.find(std::string(label));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeId> Graph::find_edge(VertexId tail, VertexId head) const {
  for (EdgeId e : out_edges(tail)) {
    if (edges_[e].head == head) return e;
  }
  return std::nullopt;
}

Graph Graph::reversed() const {
  std::vector<Edge> flipped;
  flipped.reserve(edges_.size());
  for (const auto& e : edges_) flipped.push_back({e.head, e.tail, e.cost});
  return build(labels_, std::move(flipped));
}

Graph Graph::with_costs(std::span<const Cost> costs) const {
  Graph g = *this;
  for (std::size_t i = 0; i < g.edges_.size(); ++i) g.edges_[i].cost = costs[i];
  return g;
}

LoadResult load_graph(std::istream& in) {
  LoadResult result;
  std::string line;
  std::size_t row = 1;  // line number; the header is line 1
  if (!std::getline(in, line)) throw InputError("empty graph stream");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    auto header = split_tabs(line);
    bool ok = header.size() >= 3 && header[0] == "from" && header[1] == "to" && header[2] == "cost" &&
              (header.size() == 3 || (header.size() == 4 && header[3] == "bidir"));
    if (!ok) throw InputError("graph header must be 'from\\tto\\tcost' (optionally '\\tbidir')");
  }

  std::vector<std::string> labels;
  std::unordered_map<std::string, VertexId> ids;
  std::vector<Edge> edges;
  std::unordered_map<std::uint64_t, EdgeId> by_pair;

  auto intern = [&](std::string_view name) {
    auto [it, inserted] = ids.emplace(std::string(name), static_cast<VertexId>(labels.size()));
    if (inserted) labels.emplace_back(name);
    return it->second;
  };
  auto add = [&](VertexId tail, VertexId head, Cost cost) {
    const std::uint64_t key = (std::uint64_t{tail} << 32) | head;
    auto [it, inserted] = by_pair.emplace(key, static_cast<EdgeId>(edges.size()));
    if (inserted) {
      edges.push_back({tail, head, cost});
      return;
    }
    auto& kept = edges[it->second];
    result.warnings.push_back(row_error(row, "duplicate edge " + labels[tail] + " -> " + labels[head] +
                                                 ", keeping the cheaper one"));
    kept.cost = std::min(kept.cost, cost);
  };

  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() < 3 || cols.size() > 4) throw InputError(row_error(row, "expected 3 or 4 columns"));
    if (cols[0].empty() || cols[1].empty()) throw InputError(row_error(row, "empty vertex label"));
    double cost = 0;
    auto text = cols[2];
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cost);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(cost)) {
      throw InputError(row_error(row, "cost '" + std::string(text) + "' is not a number"));
    }
    if (cost < 0) throw InputError(row_error(row, "negative cost " + std::string(text)));
    if (cols[0] == cols[1]) throw InputError(row_error(row, "self-loop at '" + std::string(cols[0]) + "'"));
    bool bidir = false;
    if (cols.size() == 4) {
      if (cols[3] == "1") {
        bidir = true;
      } else if (!cols[3].empty() && cols[3] != "0") {
        throw InputError(row_error(row, "bidir column must be 0 or 1"));
      }
    }
    const VertexId tail = intern(cols[0]);
    const VertexId head = intern(cols[1]);
    add(tail, head, cost);
    if (bidir) add(head, tail, cost);
  }
  result.graph = Graph::build(std::move(labels), std::move(edges));
  return result;
}

LoadResult load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  return load_graph(in);
}

Graph perturb_costs(const Graph& g, const PerturbationSpec& spec) {
  if (!(spec.relative_magnitude >= 0 && spec.relative_magnitude < 1e-3)) {
    throw InputError("perturbation magnitude must lie in [0, 1e-3)");
  }
  std::vector<Cost> costs(g.num_edges());
  const std::uint64_t key = splitmix64(spec.seed);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const double u = static_cast<double>(splitmix64(key ^ splitmix64(e)) >> 11) * 0x1.0p-53;
    costs[e] = g.edge(e).cost * (1.0 + u * spec.relative_magnitude);
  }
  return g.with_costs(costs);
}

Graph trim_dead_ends(const Graph& g, std::span<const std::string> keep) {
  const std::size_t n = g.num_vertices();
  std::vector<char> kept(n, 0);
  for (const auto& name : keep) {
    auto v = g.find(name);
    if (!v) throw InputError("vertex '" + name + "' is not in the graph");
    kept[*v] = 1;
  }

  // Undirected neighbour sets; a vertex is a dead end once at most one
  // distinct neighbour survives.
  std::vector<std::unordered_set<VertexId>> nbrs(n);
  for (const auto& e : g.edges()) {
    nbrs[e.tail].insert(e.head);
    nbrs[e.head].insert(e.tail);
  }
  std::vector<char> alive(n, 1);
  std::vector<VertexId> stack;
  for (VertexId v = 0; v < n; ++v) {
    if (!kept[v] && nbrs[v].size() <= 1) stack.push_back(v);
  }
  while (!stack.empty()) {
    const VertexId v = stack.back();
    stack.pop_back();
    if (!alive[v]) continue;
    alive[v] = 0;
    for (VertexId w : nbrs[v]) {
      nbrs[w].erase(v);
      if (alive[w] && !kept[w] && nbrs[w].size() <= 1) stack.push_back(w);
    }
    nbrs[v].clear();
  }

  std::vector<VertexId> remap(n, kNoVertex);
  std::vector<std::string> labels;
  for (VertexId v = 0; v < n; ++v) {
    if (!alive[v]) continue;
    remap[v] = static_cast<VertexId>(labels.size());
    labels.push_back(g.label(v));
  }
  std::vector<Edge> edges;
  for (const auto& e : g.edges()) {
    if (alive[e.tail] && alive[e.head]) edges.push_back({remap[e.tail], remap[e.head], e.cost});
  }
  return Graph::build(std::move(labels), std::move(edges));
}

std::uint64_t content_hash(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace revc
