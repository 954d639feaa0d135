#include "revc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "revc/sp_engine.hpp"
#include "revc/via_selection.hpp"

namespace revc {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace

void RevcParams::validate() const {
  require(std::isfinite(alpha) && alpha > 0 && alpha <= 1, "alpha must lie in (0, 1]");
  require(std::isfinite(beta) && beta >= 1, "beta must be at least 1");
  require(std::isfinite(gamma) && gamma > 0 && gamma <= 1, "gamma must lie in (0, 1]");
  require(std::isfinite(delta) && delta >= 1 && delta <= 2, "delta must lie in [1, 2]");
  require(perturbation.relative_magnitude >= 0 && perturbation.relative_magnitude < 1e-3,
          "perturbation must lie in [0, 1e-3)");
  require(!shortcut_cap || (std::isfinite(*shortcut_cap) && *shortcut_cap >= 0), "shortcut cap must be >= 0");
  require(threads >= 1, "threads must be at least 1");
  require(rel_tol >= 0 && rel_tol < 1e-3, "tolerance must lie in [0, 1e-3)");
}

OdSet OdSet::cross(std::vector<VertexId> origins, std::vector<VertexId> destinations) {
  OdSet od;
  od.origins = std::move(origins);
  od.destinations = std::move(destinations);
  for (std::uint32_t i = 0; i < od.origins.size(); ++i) {
    for (std::uint32_t j = 0; j < od.destinations.size(); ++j) od.pairs.emplace_back(i, j);
  }
  return od;
}

OdFile parse_od(std::istream& in) {
  OdFile od;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw InputError("od line " + std::to_string(row) + ": expected 'origin<TAB>destination'");
    }
    std::string o = line.substr(0, tab);
    std::string d = line.substr(tab + 1);
    if (row == 1 && o == "origin" && d == "destination") continue;
    if (o.empty() || d.empty()) throw InputError("od line " + std::to_string(row) + ": empty label");
    if (!seen.emplace(o, d).second) {
      od.warnings.push_back("od line " + std::to_string(row) + ": duplicate pair " + o + " -> " + d + " dropped");
      continue;
    }
    od.pairs.emplace_back(std::move(o), std::move(d));
  }
  return od;
}

OdFile parse_od_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open od file '" + path + "'");
  return parse_od(in);
}

OdSet resolve_od(const Graph& g, const OdFile& file) {
  OdSet od;
  std::map<VertexId, std::uint32_t> oi, di;
  for (std::size_t r = 0; r < file.pairs.size(); ++r) {
    const auto& [o, d] = file.pairs[r];
    auto ov = g.find(o);
    auto dv = g.find(d);
    if (!ov) throw InputError("od pair " + std::to_string(r + 1) + ": unknown vertex '" + o + "'");
    if (!dv) throw InputError("od pair " + std::to_string(r + 1) + ": unknown vertex '" + d + "'");
    auto [oit, onew] = oi.emplace(*ov, static_cast<std::uint32_t>(od.origins.size()));
    if (onew) od.origins.push_back(*ov);
    auto [dit, dnew] = di.emplace(*dv, static_cast<std::uint32_t>(od.destinations.size()));
    if (dnew) od.destinations.push_back(*dv);
    od.pairs.emplace_back(oit->second, dit->second);
  }
  return od;
}

RevcResult run_revc(const Graph& g, const ReachIndex& idx, const OdSet& od, const RevcParams& params) {
  params.validate();
  RevcResult result;
  RunReport& rep = result.report;
  Stopwatch total;
  Stopwatch phase;

  DistanceMatrix dm = od_distance_matrix(g, od.origins, od.destinations, params.threads);
  const std::size_t nd = od.destinations.size();
  std::vector<char> listed(dm.dist.size(), 0);
  for (const auto& [i, j] : od.pairs) listed[i * nd + j] = 1;
  rep.pairs = od.pairs.size();
  for (std::size_t cell = 0; cell < dm.dist.size(); ++cell) {
    if (!listed[cell]) {
      dm.dist[cell] = kInfCost;
    } else if (od.origins[cell / nd] == od.destinations[cell % nd]) {
      dm.dist[cell] = kInfCost;
      ++rep.skipped_same;
    } else if (dm.dist[cell] == kInfCost) {
      ++rep.skipped_unreachable;
    }
  }
  dm.refresh_aggregates();
  rep.seconds.matrix = phase.lap();

  const EndpointBounds bounds = EndpointBounds::from(dm, params.alpha, params.beta);
  TreeOptions topts;
  topts.reach_prune = params.reach_prune;
  topts.dmin_prune = params.dmin_prune;
  topts.naive_height = params.naive_tree_bound;
  topts.threads = params.threads;
  const TreeGrowthResult trees = grow_all_trees(g, idx, dm, bounds, topts);
  rep.forward_trees = trees.forward_stats;
  rep.backward_trees = trees.backward_stats;
  rep.seconds.trees = phase.lap();

  ViaEdgeSet es = collect_via_edges(trees.scans);
  rep.via_edges = es.edges.size();
  if (params.dedup_neighbours) es = eliminate_dominated_edges(g, trees.scans, es);
  rep.via_edges_kept = es.edges.size();
  rep.via_vertices = es.via_vertices(g).size();
  std::vector<CandidateTriple> triples = candidate_triples(g, trees.scans, es, trees, dm);
  rep.triples = triples.size();
  triples = filter_by_length(std::move(triples), dm, params.beta, params.rel_tol);
  rep.triples_length_ok = triples.size();
  if (params.dedup) {
    DedupStats ds;
    triples = dedup_by_length(std::move(triples), trees.scans, params.rel_tol, &ds);
    rep.dedup_merged = ds.merged;
  }
  rep.triples_deduped = triples.size();
  rep.seconds.via = phase.lap();

  Step4Options sopts;
  sopts.alpha = params.alpha;
  sopts.gamma = params.gamma;
  sopts.delta = params.delta;
  sopts.batching = params.batch_lo;
  sopts.use_cache = params.sp_cache;
  sopts.threads = params.threads;
  sopts.rel_tol = params.rel_tol;
  std::vector<AdmissibleRoute> routes =
      run_step4(g, idx, std::move(triples), trees, od.origins.size(), od.destinations.size(), sopts, &rep.step4);

  // Length classes can still hold the same sequence twice (or many times
  // when length dedup is off); keep the first in output order.
  std::set<std::tuple<std::uint32_t, std::uint32_t, std::vector<VertexId>>> seen;
  for (auto& r : routes) {
    if (seen.emplace(r.origin, r.dest, r.vertices).second) {
      result.routes.push_back(std::move(r));
    } else {
      ++rep.duplicate_sequences;
    }
  }
  rep.seconds.step4 = phase.lap();
  rep.seconds.total = total.lap();

  rep.routes = result.routes.size();
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> per_pair;
  for (const auto& [i, j] : od.pairs) {
    if (dm.at(i, j) != kInfCost) per_pair[{i, j}] = 0;
  }
  double length_sum = 0;
  for (const auto& r : result.routes) {
    ++per_pair[{r.origin, r.dest}];
    length_sum += r.cost;
  }
  std::vector<double> counts;
  for (const auto& [key, c] : per_pair) counts.push_back(static_cast<double>(c));
  std::sort(counts.begin(), counts.end());
  if (!counts.empty()) {
    rep.routes_per_pair = static_cast<double>(rep.routes) / static_cast<double>(counts.size());
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) rep.routes_per_pair_quantiles.push_back(quantile(counts, q));
  }
  rep.mean_length = rep.routes ? length_sum / static_cast<double>(rep.routes) : 0;
  return result;
}

Cost estimate_mean_distance(const Graph& g, std::uint64_t seed, std::size_t samples) {
  if (g.num_vertices() == 0) return 0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(g.num_vertices() - 1));
  double sum = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const SpTree t = dijkstra_tree(g, pick(rng), Direction::kForward);
    for (Cost c : t.cost) {
      if (c > 0 && c != kInfCost) {
        sum += c;
        ++count;
      }
    }
  }
  return count ? sum / static_cast<double>(count) : 0;
}

Cost effective_cap(const RevcParams& params, Cost mean_distance) {
  return params.shortcut_cap.value_or(kDefaultCapFraction * mean_distance);
}

void write_routes_jsonl(std::ostream& out, const Graph& g, const OdSet& od,
                        const std::vector<AdmissibleRoute>& routes) {
  for (const auto& r : routes) {
    nlohmann::ordered_json j;
    j["origin"] = g.label(od.origins[r.origin]);
    j["destination"] = g.label(od.destinations[r.dest]);
    j["via"] = g.label(r.via);
    j["cost"] = r.cost;
    j["guaranteed_alpha"] = r.guaranteed_alpha;
    auto& vs = j["vertices"] = nlohmann::ordered_json::array();
    for (VertexId v : r.vertices) vs.push_back(g.label(v));
    out << j.dump() << '\n';
  }
}

std::vector<RouteRecord> read_routes_jsonl(std::istream& in) {
  std::vector<RouteRecord> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RouteRecord r;
      r.origin = j.at("origin").get<std::string>();
      r.destination = j.at("destination").get<std::string>();
      r.via = j.at("via").get<std::string>();
      r.cost = j.at("cost").get<double>();
      r.guaranteed_alpha = j.at("guaranteed_alpha").get<double>();
      r.vertices = j.at("vertices").get<std::vector<std::string>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("route line " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace revc
