#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revc/graph.hpp"
#include "revc/oracle.hpp"
#include "revc/pipeline.hpp"
#include "revc/reach.hpp"
#include "revc/sp_engine.hpp"

namespace fs = std::filesystem;
using namespace revc;

namespace {

constexpr int kExitInput = 1;
constexpr int kExitVerify = 2;
constexpr std::size_t kOracleVertexLimit = 3000;

struct CommonArgs {
  std::string graph;
  std::string index;
  std::string od;
  std::string output;
  std::string stats_csv;
  double perturb = 1e-9;
  std::uint64_t seed = 0;
  double cap = -1;  // < 0: default fraction of the mean distance
  bool force_index = false;
  RevcParams params;
  bool no_prune = false, no_dmin = false, naive_bound = false, no_dedup_nb = false, no_dedup = false,
       no_batch = false, no_cache = false;

  RevcParams resolved() const {
    RevcParams p = params;
    p.perturbation = {perturb, seed};
    if (cap >= 0) p.shortcut_cap = cap;
    p.reach_prune = !no_prune;
    p.dmin_prune = !no_dmin;
    p.naive_tree_bound = naive_bound;
    p.dedup_neighbours = !no_dedup_nb;
    p.dedup = !no_dedup;
    p.batch_lo = !no_batch;
    p.sp_cache = !no_cache;
    return p;
  }
  std::string index_path() const { return index.empty() ? graph + ".revcidx" : index; }
};

void add_graph(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("graph", a.graph, "Edge list (from<TAB>to<TAB>cost[<TAB>bidir])")->required()->check(CLI::ExistingFile);
  cmd->add_option("--perturb", a.perturb, "Relative cost perturbation magnitude")->check(CLI::Range(0.0, 1e-3));
  cmd->add_option("--seed", a.seed, "Seed for perturbation and sampling");
  cmd->add_option("--threads", a.params.threads, "Worker threads")->check(CLI::PositiveNumber);
}

void add_index(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--index", a.index, "Index sidecar (default <graph>.revcidx)");
  cmd->add_flag("--force-index", a.force_index, "Use or overwrite a sidecar whose key does not match");
  cmd->add_option("--shortcut-cap", a.cap, "Absolute shortcut cap (default 3% of the mean distance)")
      ->check(CLI::NonNegativeNumber);
}

void add_params(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--alpha", a.params.alpha, "Local optimality fraction")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--beta", a.params.beta, "Length stretch bound")->check(CLI::Range(1.0, 1e9));
  cmd->add_option("--gamma", a.params.gamma, "Acceptance slack")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--delta", a.params.delta, "Probe section factor")->check(CLI::Range(1.0, 2.0));
}

void add_ablations(CLI::App* cmd, CommonArgs& a) {
  cmd->add_flag("--no-prune", a.no_prune, "Grow trees without reach pruning");
  cmd->add_flag("--no-dmin-prune", a.no_dmin, "Skip the second-pass nearest-partner pruning");
  cmd->add_flag("--naive-tree-bound", a.naive_bound, "Grow every tree to beta times the farthest partner");
  cmd->add_flag("--no-dedup-neighbours", a.no_dedup_nb, "Keep dominated neighbouring via edges");
  cmd->add_flag("--no-dedup", a.no_dedup, "Skip length-based candidate deduplication");
  cmd->add_flag("--no-batch-lo", a.no_batch, "Test every candidate individually");
  cmd->add_flag("--no-sp-cache", a.no_cache, "Disable the probed-section cache");
}

struct Loaded {
  Graph raw;
  std::uint64_t hash = 0;
};

Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open graph file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  std::istringstream text(bytes);
  LoadResult lr = load_graph(text);
  for (const auto& w : lr.warnings) std::cerr << "warning: " << w << '\n';
  return {std::move(lr.graph), content_hash(bytes)};
}

/// Graph ready for queries plus its index, taken from the sidecar when one
/// exists (which also fixes the trimming), computed in memory otherwise.
struct Prepared {
  Graph graph;
  ReachIndex index;
};

IndexKey make_key(const Loaded& l, const CommonArgs& a, std::vector<std::string> keep, std::size_t n) {
  IndexKey key;
  key.graph_hash = l.hash;
  key.perturbation = a.perturb;
  key.seed = a.seed;
  key.trimmed = !keep.empty();
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  key.trim_keep = std::move(keep);
  key.num_vertices = n;
  return key;
}

Graph prepare_graph(const Graph& raw, const CommonArgs& a, const std::vector<std::string>& keep) {
  Graph g = keep.empty() ? raw : trim_dead_ends(raw, keep);
  return perturb_costs(g, {a.perturb, a.seed});
}

ReachIndex build_index(const Graph& g, const CommonArgs& a) {
  ReachOptions ro;
  ro.threads = a.params.threads;
  ro.cap = effective_cap(a.resolved(), estimate_mean_distance(g, a.seed));
  return compute_reach_bounds(g, ro);
}

Prepared prepare(const CommonArgs& a, const std::vector<std::string>& od_labels) {
  const Loaded l = load(a.graph);
  const std::string path = a.index_path();
  if (fs::exists(path)) {
    LoadedIndex li = load_index_file(path);
    const IndexKey want = make_key(l, a, li.key.trim_keep, 0);
    const bool fresh = li.key.graph_hash == want.graph_hash && li.key.perturbation == want.perturbation &&
                       li.key.seed == want.seed;
    if (!fresh && !a.force_index) {
      throw InputError("index '" + path + "' was built for a different graph or perturbation; rerun preprocess or pass --force-index");
    }
    if (li.key.trimmed) {
      for (const auto& label : od_labels) {
        if (!std::binary_search(li.key.trim_keep.begin(), li.key.trim_keep.end(), label)) {
          throw InputError("vertex '" + label + "' is not kept by the trimmed index '" + path + "'");
        }
      }
    }
    Prepared p{prepare_graph(l.raw, a, li.key.trimmed ? li.key.trim_keep : std::vector<std::string>{}), {}};
    if (p.graph.num_vertices() != li.key.num_vertices || li.index.bound.size() != p.graph.num_vertices()) {
      if (!a.force_index) throw InputError("index '" + path + "' does not match the graph size");
      p.index = build_index(p.graph, a);
    } else {
      p.index = std::move(li.index);
    }
    return p;
  }
  Prepared p{prepare_graph(l.raw, a, {}), {}};
  p.index = build_index(p.graph, a);
  return p;
}

std::vector<std::string> od_labels(const OdFile& od) {
  std::vector<std::string> out;
  for (const auto& [o, d] : od.pairs) {
    out.push_back(o);
    out.push_back(d);
  }
  return out;
}

OdFile read_od(const std::string& path) {
  OdFile od = parse_od_file(path);
  for (const auto& w : od.warnings) std::cerr << "warning: " << w << '\n';
  return od;
}

/// Writes to the file named by `path`, or stdout when it is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw InputError("cannot write '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void print_report(const RunReport& r) {
  std::fprintf(stderr, "pairs %zu (same-vertex %zu, unreachable %zu), routes %zu, %.3f per pair, mean length %.6g\n",
               r.pairs, r.skipped_same, r.skipped_unreachable, r.routes, r.routes_per_pair, r.mean_length);
  if (r.routes_per_pair_quantiles.size() == 5) {
    std::fprintf(stderr, "routes per pair quantiles: %g %g %g %g %g\n", r.routes_per_pair_quantiles[0],
                 r.routes_per_pair_quantiles[1], r.routes_per_pair_quantiles[2], r.routes_per_pair_quantiles[3],
                 r.routes_per_pair_quantiles[4]);
  }
  std::fprintf(stderr, "seconds: matrix %.4f trees %.4f via %.4f step4 %.4f total %.4f\n", r.seconds.matrix,
               r.seconds.trees, r.seconds.via, r.seconds.step4, r.seconds.total);
  std::fprintf(stderr, "via edges %zu (kept %zu), via vertices %zu, triples %zu -> %zu -> %zu, dedup merged %llu\n",
               r.via_edges, r.via_edges_kept, r.via_vertices, r.triples, r.triples_length_ok, r.triples_deduped,
               static_cast<unsigned long long>(r.dedup_merged));
  std::fprintf(stderr, "tests %llu, queries %llu (max %llu per test), cache hits %llu\n",
               static_cast<unsigned long long>(r.step4.tests), static_cast<unsigned long long>(r.step4.queries),
               static_cast<unsigned long long>(r.step4.max_queries_per_test),
               static_cast<unsigned long long>(r.step4.cache_hits));
  if (r.skipped_same) std::fprintf(stderr, "warning: %zu same-vertex pairs yield no routes\n", r.skipped_same);
  if (r.skipped_unreachable) std::fprintf(stderr, "warning: %zu unreachable pairs skipped\n", r.skipped_unreachable);
}

// ---- preprocess ------------------------------------------------------------

int cmd_preprocess(const CommonArgs& a) {
  const Loaded l = load(a.graph);
  std::vector<std::string> keep;
  if (!a.od.empty()) keep = od_labels(read_od(a.od));
  IndexKey key = make_key(l, a, keep, 0);
  const Graph g = prepare_graph(l.raw, a, key.trim_keep);
  key.num_vertices = g.num_vertices();
  const std::string path = a.index_path();
  if (fs::exists(path)) {
    const LoadedIndex old = load_index_file(path);
    if (old.key == key) {
      std::cerr << "index up to date: " << path << '\n';
      return 0;
    }
    if (!a.force_index) {
      throw InputError("index '" + path + "' exists with a different key; pass --force-index to overwrite");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const ReachIndex idx = build_index(g, a);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  save_index_file(path, key, idx);
  const auto finite = std::count_if(idx.bound.begin(), idx.bound.end(), [](Cost b) { return b != kInfCost; });
  std::fprintf(stderr, "vertices %zu, finite bounds %zu, shortcuts %zu (cap %.6g), %.3f s -> %s\n", g.num_vertices(),
               static_cast<std::size_t>(finite), idx.shortcuts.size(), idx.cap, secs, path.c_str());
  return 0;
}

// ---- routes ----------------------------------------------------------------

void write_stats_csv(const std::string& path, const RunReport& r) {
  if (path.empty()) return;
  Output out(path);
  auto& o = out.stream();
  o << "pairs,routes,routes_per_pair,mean_length,total_s,time_per_route_ms,matrix_s,trees_s,via_s,step4_s,"
       "dedup_merged,tests,queries\n";
  o << r.pairs << ',' << r.routes << ',' << r.routes_per_pair << ',' << r.mean_length << ',' << r.seconds.total << ','
    << (r.routes ? 1e3 * r.seconds.total / static_cast<double>(r.routes) : 0.0) << ',' << r.seconds.matrix << ','
    << r.seconds.trees << ',' << r.seconds.via << ',' << r.seconds.step4 << ',' << r.dedup_merged << ','
    << r.step4.tests << ',' << r.step4.queries << '\n';
}

int cmd_routes(const CommonArgs& a) {
  const RevcParams params = a.resolved();
  params.validate();
  const OdFile odf = read_od(a.od);
  const Prepared p = prepare(a, od_labels(odf));
  const OdSet od = resolve_od(p.graph, odf);
  const RevcResult res = run_revc(p.graph, p.index, od, params);
  Output out(a.output);
  write_routes_jsonl(out.stream(), p.graph, od, res.routes);
  print_report(res.report);
  write_stats_csv(a.stats_csv, res.report);
  return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  std::size_t origins = 20;
  std::size_t destinations = 20;
  std::size_t repetitions = 3;
  std::vector<double> alphas, betas, gammas, deltas;
};

struct Moments {
  std::vector<double> xs;
  double mean() const { return xs.empty() ? 0 : std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(); }
  double sd() const {
    if (xs.size() < 2) return 0;
    const double m = mean();
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
  }
};

int cmd_bench(const CommonArgs& a, BenchArgs b) {
  const RevcParams base = a.resolved();
  base.validate();
  const Prepared p = prepare(a, {});
  const std::size_t n = p.graph.num_vertices();
  if (b.origins == 0 || b.destinations == 0 || b.origins > n || b.destinations > n) {
    throw InputError("origin and destination counts must lie in [1, " + std::to_string(n) + "]");
  }
  if (b.repetitions == 0) throw InputError("repetitions must be at least 1");
  if (b.alphas.empty()) b.alphas = {base.alpha};
  if (b.betas.empty()) b.betas = {base.beta};
  if (b.gammas.empty()) b.gammas = {base.gamma};
  if (b.deltas.empty()) b.deltas = {base.delta};

  // Endpoint sets are drawn once per repetition and reused for every
  // parameter combination.
  std::vector<OdSet> scenarios;
  std::vector<double> pairwise_s;
  std::mt19937_64 rng(a.seed);
  for (std::size_t r = 0; r < b.repetitions; ++r) {
    std::vector<VertexId> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<VertexId> o(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(b.origins));
    std::shuffle(all.begin(), all.end(), rng);
    std::vector<VertexId> d(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(b.destinations));
    scenarios.push_back(OdSet::cross(std::move(o), std::move(d)));

    ReachQuery rq(p.graph, p.index);
    const auto t0 = std::chrono::steady_clock::now();
    double sink = 0;
    for (const auto& [i, j] : scenarios.back().pairs) {
      const Cost c = rq.distance(scenarios.back().origins[i], scenarios.back().destinations[j]);
      if (c != kInfCost) sink += c;
    }
    pairwise_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (sink < 0) std::cerr << sink;
  }

  Output out(a.stats_csv.empty() ? a.output : a.stats_csv);
  auto& csv = out.stream();
  csv << "alpha,beta,gamma,delta,repetitions,total_s_mean,total_s_sd,time_per_route_ms_mean,time_per_route_ms_sd,"
         "slowdown_mean,slowdown_sd,routes_per_pair_mean,routes_per_pair_sd,mean_length_mean,mean_length_sd,"
         "pairwise_s_mean\n";
  Moments pairwise{pairwise_s};
  for (double alpha : b.alphas) {
    for (double beta : b.betas) {
      for (double gamma : b.gammas) {
        for (double delta : b.deltas) {
          RevcParams params = base;
          params.alpha = alpha;
          params.beta = beta;
          params.gamma = gamma;
          params.delta = delta;
          params.validate();
          Moments total, per_route, slowdown, per_pair, length;
          for (std::size_t r = 0; r < scenarios.size(); ++r) {
            const RunReport rep = run_revc(p.graph, p.index, scenarios[r], params).report;
            total.xs.push_back(rep.seconds.total);
            per_route.xs.push_back(rep.routes ? 1e3 * rep.seconds.total / static_cast<double>(rep.routes) : 0.0);
            slowdown.xs.push_back(pairwise_s[r] > 0 ? rep.seconds.total / pairwise_s[r] : 0.0);
            per_pair.xs.push_back(rep.routes_per_pair);
            length.xs.push_back(rep.mean_length);
          }
          csv << alpha << ',' << beta << ',' << gamma << ',' << delta << ',' << scenarios.size() << ','
              << total.mean() << ',' << total.sd() << ',' << per_route.mean() << ',' << per_route.sd() << ','
              << slowdown.mean() << ',' << slowdown.sd() << ',' << per_pair.mean() << ',' << per_pair.sd() << ','
              << length.mean() << ',' << length.sd() << ',' << pairwise.mean() << '\n';
          std::fprintf(stderr, "alpha %.3g beta %.3g gamma %.3g delta %.3g: %.4f s, slowdown %.2f, %.3f routes/pair\n",
                       alpha, beta, gamma, delta, total.mean(), slowdown.mean(), per_pair.mean());
        }
      }
    }
  }
  return 0;
}

// ---- oracle ----------------------------------------------------------------

int cmd_oracle(const CommonArgs& a, bool compare, bool force) {
  const RevcParams params = a.resolved();
  params.validate();
  const OdFile odf = read_od(a.od);
  const Loaded l = load(a.graph);
  if (l.raw.num_vertices() > kOracleVertexLimit && !force) {
    throw InputError("graph has " + std::to_string(l.raw.num_vertices()) + " vertices, above the oracle limit of " +
                     std::to_string(kOracleVertexLimit) + "; pass --force");
  }
  const Graph g = prepare_graph(l.raw, a, {});
  const OdSet od = resolve_od(g, odf);

  DistanceTable table(g);
  Output out(a.output);
  for (const auto& [i, j] : od.pairs) {
    const VertexId s = od.origins[i];
    const VertexId t = od.destinations[j];
    for (const auto& r : oracle_admissible(g, s, t, params.alpha, params.beta, table, params.rel_tol)) {
      nlohmann::ordered_json rec;
      rec["origin"] = g.label(s);
      rec["destination"] = g.label(t);
      rec["via"] = g.label(r.via);
      rec["cost"] = r.length;
      rec["guaranteed_alpha"] = params.alpha;
      auto& vs = rec["vertices"] = nlohmann::ordered_json::array();
      for (VertexId v : r.vertices) vs.push_back(g.label(v));
      rec["exact_factor"] = r.exact_factor;
      out.stream() << rec.dump() << '\n';
    }
  }
  if (!compare) return 0;

  ReachOptions ro;
  ro.threads = params.threads;
  ro.cap = effective_cap(params, estimate_mean_distance(g, a.seed));
  const ReachIndex idx = compute_reach_bounds(g, ro);
  const RevcResult res = run_revc(g, idx, od, params);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> slot;
  std::vector<SandwichPair> pairs;
  for (const auto& [i, j] : od.pairs) {
    slot[{i, j}] = pairs.size();
    pairs.push_back({od.origins[i], od.destinations[j], {}});
  }
  for (const auto& r : res.routes) pairs[slot.at({r.origin, r.dest})].returned.push_back(r.vertices);
  const SandwichReport rep =
      compare_with_oracle(g, pairs, params.alpha, params.beta, params.gamma, params.delta, params.rel_tol);
  const bool ok = rep.spurious == 0 && rep.missing == 0;
  std::fprintf(stderr,
               "returned %zu, admissible %zu, strong %zu, spurious %zu, missing %zu, unrepresented %zu, "
               "exact mismatch %zu\n%s\n",
               rep.returned, rep.admissible, rep.strong, rep.spurious, rep.missing, rep.unrepresented,
               rep.exact_mismatch, ok ? "verdict: PASS" : "verdict: FAIL");
  return ok ? 0 : kExitVerify;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("bad number '" + item + "' in list '" + s + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locally optimal single-via alternative routes between origin and destination sets"};
  app.require_subcommand(1);

  CommonArgs pre_args, route_args, bench_args, oracle_args;

  auto* pre = app.add_subcommand("preprocess", "Compute reach bounds and shortcuts into an index sidecar");
  add_graph(pre, pre_args);
  add_index(pre, pre_args);
  pre->add_option("--od", pre_args.od, "Trim dead ends, keeping the vertices of this OD file")->check(CLI::ExistingFile);

  auto* routes = app.add_subcommand("routes", "Compute admissible routes for an OD file");
  add_graph(routes, route_args);
  add_index(routes, route_args);
  add_params(routes, route_args);
  add_ablations(routes, route_args);
  routes->add_option("--od", route_args.od, "TSV of origin<TAB>destination pairs")->required()->check(CLI::ExistingFile);
  routes->add_option("--output,-o", route_args.output, "Route file (JSON Lines; default stdout)");
  routes->add_option("--stats-csv", route_args.stats_csv, "Write a one-row run summary");

  BenchArgs bargs;
  std::string alphas, betas, gammas, deltas;
  auto* bench = app.add_subcommand("bench", "Random-scenario timing and route statistics");
  add_graph(bench, bench_args);
  add_index(bench, bench_args);
  add_params(bench, bench_args);
  add_ablations(bench, bench_args);
  bench->add_option("--origins", bargs.origins, "Origins per scenario");
  bench->add_option("--destinations", bargs.destinations, "Destinations per scenario");
  bench->add_option("--repetitions", bargs.repetitions, "Scenarios (endpoint sets)");
  bench->add_option("--alphas", alphas, "Comma-separated alpha sweep");
  bench->add_option("--betas", betas, "Comma-separated beta sweep");
  bench->add_option("--gammas", gammas, "Comma-separated gamma sweep");
  bench->add_option("--deltas", deltas, "Comma-separated delta sweep");
  bench->add_option("--output,-o,--stats-csv", bench_args.output, "CSV destination (default stdout)");

  bool compare = false, force = false;
  auto* oracle = app.add_subcommand("oracle", "Exhaustive admissible routes for small graphs");
  add_graph(oracle, oracle_args);
  add_params(oracle, oracle_args);
  add_ablations(oracle, oracle_args);
  oracle->add_option("--shortcut-cap", oracle_args.cap, "Absolute shortcut cap for --compare")
      ->check(CLI::NonNegativeNumber);
  oracle->add_option("--od", oracle_args.od, "TSV of origin<TAB>destination pairs")->required()->check(CLI::ExistingFile);
  oracle->add_option("--output,-o", oracle_args.output, "Route file (JSON Lines; default stdout)");
  oracle->add_flag("--compare", compare, "Also run the pipeline and check it against the oracle");
  oracle->add_flag("--force", force, "Ignore the graph size limit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*pre) return cmd_preprocess(pre_args);
    if (*routes) return cmd_routes(route_args);
    if (*bench) {
      bargs.alphas = parse_list(alphas);
      bargs.betas = parse_list(betas);
      bargs.gammas = parse_list(gammas);
      bargs.deltas = parse_list(deltas);
      return cmd_bench(bench_args, bargs);
    }
    if (*oracle) return cmd_oracle(oracle_args, compare, force);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
