#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "revc/types.hpp"

namespace revc {

struct Edge {
  VertexId tail;
  VertexId head;
  Cost cost;
};

/// Immutable directed weighted graph. Vertex ids are dense (0..n-1) and map
/// one-to-one onto external string labels; edge ids index the edge list.
/// Both forward and reverse adjacency are kept in CSR form.
class Graph {
 public:
  Graph() = default;

  /// Validates and builds. Rejects self-loops, negative or non-finite costs
  /// and duplicate labels. Parallel edges must already be collapsed.
  static Graph build(std::vector<std::string> labels, std::vector<Edge> edges);

  std::size_t num_vertices() const { return labels_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const Edge& edge(EdgeId e) const { return edges_[e]; }
  std::span<const Edge> edges() const { return edges_; }

  std::span<const EdgeId> out_edges(VertexId v) const {
    return {out_ids_.data() + out_offset_[v], out_ids_.data() + out_offset_[v + 1]};
  }
  std::span<const EdgeId> in_edges(VertexId v) const {
    return {in_ids_.data() + in_offset_[v], in_ids_.data() + in_offset_[v + 1]};
  }
  /// Outgoing edges in `dir`: forward adjacency or reverse adjacency.
  std::span<const EdgeId> adjacent(VertexId v, Direction dir) const {
    return dir == Direction::kForward ? out_edges(v) : in_edges(v);
  }
  /// The endpoint of `e` reached when traversing it in `dir`.
  VertexId far_end(EdgeId e, Direction dir) const {
    return dir == Direction::kForward ? edges_[e].head : edges_[e].tail;
  }

  const std::string& label(VertexId v) const { return labels_[v]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<VertexId> find(std::string_view label) const;

  /// Edge from `tail` to `head`, if present.
  std::optional<EdgeId> find_edge(VertexId tail, VertexId head) const;

  /// Same vertices, every edge flipped. Edge ids are preserved.
  Graph reversed() const;

  /// Copy with replaced edge costs (same topology and ids).
  Graph with_costs(std::span<const Cost> costs) const;

 private:
  void index();

  std::vector<std::string> labels_;
  std::unordered_map<std::string, VertexId> label_index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offset_, in_offset_;
  std::vector<EdgeId> out_ids_, in_ids_;
};

struct LoadResult {
  Graph graph;
  std::vector<std::string> warnings;
};

/// Parses the TSV edge format (`from\tto\tcost[\tbidir]`). Ids follow label
/// first appearance; edge order follows the rows. Throws InputError naming
/// the offending row.
LoadResult load_graph(std::istream& in);
LoadResult load_graph_file(const std::string& path);

struct PerturbationSpec {
  double relative_magnitude = 1e-9;
  std::uint64_t seed = 0;
};

/// Multiplies each cost by (1 + u), u ~ U[0, magnitude), drawn from a
/// counter-based generator keyed by (seed, edge id).
Graph perturb_costs(const Graph& g, const PerturbationSpec& spec);

/// Removes, until fixpoint, vertices outside `keep` with at most one
/// distinct neighbour (ignoring direction). Surviving vertices keep their
/// relative order.
Graph trim_dead_ends(const Graph& g, std::span<const std::string> keep);

/// 64-bit FNV-1a over a byte string; used to key index sidecars.
std::uint64_t content_hash(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace revc
