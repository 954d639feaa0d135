#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "revc/graph.hpp"
#include "revc/local_optimality.hpp"
#include "revc/reach.hpp"
#include "revc/tree_growth.hpp"

namespace revc {

struct RevcParams {
  double alpha = 0.2;
  double beta = 1.5;
  double gamma = 0.9;
  double delta = 1.1;
  PerturbationSpec perturbation;
  std::optional<Cost> shortcut_cap;  // absolute; default 3% of the mean OD distance
  unsigned threads = 1;
  double rel_tol = kDefaultRelTol;

  bool reach_prune = true;
  bool dmin_prune = true;
  bool naive_tree_bound = false;
  bool dedup_neighbours = true;
  bool dedup = true;
  bool batch_lo = true;
  bool sp_cache = true;

  /// Throws InputError on any value outside its domain.
  void validate() const;
};

inline constexpr double kDefaultCapFraction = 0.03;

/// Endpoints as ordinals into `origins` / `destinations`, plus the pairs
/// requested. Origins and destinations are in first-appearance order.
struct OdSet {
  std::vector<VertexId> origins;
  std::vector<VertexId> destinations;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

  /// Every origin paired with every destination.
  static OdSet cross(std::vector<VertexId> origins, std::vector<VertexId> destinations);
};

struct OdFile {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> warnings;
};

/// TSV `origin\tdestination`, optional header of that form. Duplicate pairs
/// are dropped with a warning.
OdFile parse_od(std::istream& in);
OdFile parse_od_file(const std::string& path);

/// Resolves labels; unknown labels raise InputError naming the row.
OdSet resolve_od(const Graph& g, const OdFile& od);

struct PhaseTimes {
  double matrix = 0;
  double trees = 0;
  double via = 0;
  double step4 = 0;
  double total = 0;
};

struct RunReport {
  PhaseTimes seconds;
  std::size_t pairs = 0;
  std::size_t skipped_same = 0;
  std::size_t skipped_unreachable = 0;
  std::size_t routes = 0;
  double routes_per_pair = 0;
  std::vector<double> routes_per_pair_quantiles;  // 0, 0.25, 0.5, 0.75, 1
  double mean_length = 0;

  TreeStats forward_trees;
  TreeStats backward_trees;
  std::size_t via_edges = 0;
  std::size_t via_edges_kept = 0;
  std::size_t via_vertices = 0;
  std::size_t triples = 0;
  std::size_t triples_length_ok = 0;
  std::size_t triples_deduped = 0;
  std::uint64_t dedup_merged = 0;
  std::size_t duplicate_sequences = 0;
  Step4Stats step4;
};

struct RevcResult {
  std::vector<AdmissibleRoute> routes;
  RunReport report;
};

/// Full pipeline on an already perturbed graph: distance matrix, trees,
/// via selection, local optimality. Routes are sorted by (origin, dest,
/// cost, vertices) and carry endpoint ordinals of `od`.
RevcResult run_revc(const Graph& g, const ReachIndex& idx, const OdSet& od, const RevcParams& params);

/// Mean finite distance from a few seeded sample roots; used to size the
/// shortcut cap when no OD set is at hand.
Cost estimate_mean_distance(const Graph& g, std::uint64_t seed, std::size_t samples = 8);

/// The cap in effect: explicit value, else a fraction of `mean_distance`.
Cost effective_cap(const RevcParams& params, Cost mean_distance);

/// One JSON object per line with labels for endpoints and vertices.
void write_routes_jsonl(std::ostream& out, const Graph& g, const OdSet& od, const std::vector<AdmissibleRoute>& routes);

/// Parsed route record, as read back from JSON Lines.
struct RouteRecord {
  std::string origin;
  std::string destination;
  std::string via;
  double cost = 0;
  double guaranteed_alpha = 0;
  std::vector<std::string> vertices;
};
std::vector<RouteRecord> read_routes_jsonl(std::istream& in);

}  // namespace revc
