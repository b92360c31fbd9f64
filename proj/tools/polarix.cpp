// polarix command-line front end.
//
// exit codes: 0 ok, 1 input error, 2 verification failure, 3 inexact result,
// 4 numeric failure

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "polarix.hpp"

using namespace polarix;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { ok = 0, input_error = 1, verify_failed = 2, inexact = 3, numeric_failure = 4 };

void emit(const ojson& j) { std::cout << j.dump(2) << '\n'; }

unsigned default_threads() {
  if (const char* env = std::getenv("POLARIX_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring POLARIX_THREADS='" << env << "'\n";
  }
  return 1;
}

WeightedDigraph read_graph(const std::string& path) { return load_graph(read_file(path)); }

ojson ids(const NodeSet& s) { return s.one_based(); }

ojson extended(const ExtendedReal& v) { return v.is_finite() ? ojson(v.value()) : ojson(nullptr); }

NodeSet parse_set(const std::string& text, Index n) {
  std::vector<std::int64_t> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stoll(tok, &used));
      if (used != tok.size()) throw InputError("");
    } catch (const std::exception&) {
      throw InputError("bad node id '" + tok + "' in --set");
    }
  }
  if (v.empty()) throw InputError("--set must list at least one node");
  return NodeSet::from_one_based(v, n);
}

// ---------------------------------------------------------------------------

struct IndexArgs {
  std::string graph;
  std::string method = "auto";
  unsigned threads = 1;
  double time_budget = 0.0;
  bool force = false;
};

int cmd_index(const IndexArgs& a) {
  const auto g = read_graph(a.graph);
  BnbOptions bnb{a.threads, a.time_budget};
  PolarizationResult r;
  if (a.method == "exhaustive") {
    r = polarization_exhaustive(g, {16, a.force});
  } else if (a.method == "bnb") {
    const auto b = bnb_solve(g, bnb);
    r.value = b.z_dagger;
    r.v1 = b.witness.positive();
    r.v2 = b.witness.negative();
    r.method = SolveMethod::branch_and_bound;
    r.exact = b.stats.complete && b.z_dagger <= 0.0;
    r.stats = b.stats;
  } else {
    PolarizationOptions opt;
    opt.bnb = bnb;
    r = polarization(g, opt);
  }
  auto j = to_json(r);
  j["n"] = g.size();
  if (r.exact && r.value < 0) j["consensus"] = "strong";
  else if (r.value >= 0) j["consensus"] = "dissensus possible";
  else j["consensus"] = "undetermined";
  emit(j);
  return r.exact ? ok : inexact;
}

// ---------------------------------------------------------------------------

int cmd_communities(const std::string& path, const std::string& set) {
  const auto g = read_graph(path);
  ojson j;
  if (!set.empty()) {
    const auto v = parse_set(set, g.size());
    j["set"] = ids(v);
    j["autonomy_upper"] = autonomy_upper(g, v);
    j["autonomy_lower"] = autonomy_lower(g, v);
    j["autonomy"] = extended(autonomy(g, v));
    j["strong_community"] = is_strong_community(g, v);
    j["key_nodes"] = ids(key_nodes(g, v));
    auto rows = ojson::array();
    for (const auto& s : autonomy_breakdown(g, v))
      rows.push_back({{"node", s.node + 1},
                      {"internal", s.internal},
                      {"external", s.external},
                      {"beta", s.beta},
                      {"alpha", s.alpha}});
    j["breakdown"] = std::move(rows);
  } else {
    const auto best = best_complementary_split(g);
    const auto sp = find_satisfactory_partition(g);
    j["satisfactory_partition"] = sp ? ojson{{"v1", ids(sp->first)}, {"v2", ids(sp->second)}} : ojson(nullptr);
    // score is min(Au(V1), Au(V2)); positive exactly when a satisfactory partition exists
    j["best_split"] = {{"v1", ids(best.v1)}, {"v2", ids(best.v2)}, {"score", best.score}};
    const auto pol = polarization(g);
    j["polarization_witness"] = {{"v1", ids(pol.v1)}, {"v2", ids(pol.v2)}, {"value", pol.value}, {"exact", pol.exact}};
    const auto sc = find_strong_community(g);
    j["strong_community"] = sc ? ids(*sc) : ojson(nullptr);
  }
  emit(j);
  return ok;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string preset;
  std::string out;
  std::string svg;
  double dt = 0;
  double t_end = -1;
  std::int64_t seed = -1;
  unsigned seeds = 1;
  unsigned threads = 1;
};

ojson simulation_summary(const WeightedDigraph& g, const Trajectory& tr, const PolarizationResult& pol) {
  ojson j;
  j["samples"] = tr.size();
  j["t_end"] = tr.times.back();
  j["initial_range"] = tr.range.front();
  j["final_range"] = tr.range.back();
  j["consensus_time"] = tr.consensus_time ? ojson(*tr.consensus_time) : ojson(nullptr);
  j["polarization_index"] = pol.value;
  j["index_exact"] = pol.exact;
  if (pol.exact && pol.value < 0)
    j["consensus_time_bound"] = consensus_time_bound(tr.range.front(), pol.value);
  else
    j["consensus_time_bound"] = nullptr;
  j["envelope_excess"] = envelope_excess(tr, pol.value);
  j["envelope_allowance"] = 4.0 * (g.max_in_strength() + g.max_disturbance_bound()) *
                            (tr.size() > 1 ? tr.times[1] - tr.times[0] : 0.0);
  return j;
}

int cmd_simulate(const SimulateArgs& a) {
  auto p = load_preset(a.preset);
  if (a.dt > 0) p.config.dt = a.dt;
  if (a.t_end >= 0) p.config.t_end = a.t_end;
  if (a.seed >= 0) {
    if (auto* b = std::get_if<BoundedNoise>(&p.disturbance)) b->seed = static_cast<std::uint64_t>(a.seed);
  }
  validate(p.config);
  const auto pol = polarization(p.graph);

  ojson j;
  j["label"] = p.label;
  j["n"] = p.graph.size();
  j["mode"] = p.extremal ? "extremal" : "simulation";
  j["disturbance"] = disturbance_name(p.disturbance);
  j["config"] = to_json(p.config);

  Trajectory tr;
  if (p.extremal) {
    auto [v1, v2] = *p.extremal;
    if (v1.empty() || v2.empty()) std::tie(v1, v2) = realizable_pair(p.graph, pol.v1, pol.v2);
    const auto plan = build_extremal(p.graph, v1, v2);
    tr = extremal_trajectory(p.graph, plan, p.config.t_end, p.config.dt);
    j["extremal"] = {{"v1", ids(plan.v1)},
                     {"v2", ids(plan.v2)},
                     {"growth_rate", plan.growth_rate},
                     {"collapse_time", std::isfinite(plan.collapse_time()) ? ojson(plan.collapse_time())
                                                                           : ojson(nullptr)},
                     {"constant_disturbance", plan.constant_disturbance}};
  } else if (a.seeds > 1) {
    if (!std::holds_alternative<BoundedNoise>(p.disturbance))
      throw InputError("--seeds needs a bounded_noise preset");
    // Independent seeds on a small worker pool; results keep seed order.
    const auto base = std::get<BoundedNoise>(p.disturbance);
    std::vector<ojson> runs(a.seeds);
    std::atomic<unsigned> next{0};
    std::string failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
      for (unsigned k; (k = next++) < a.seeds;) {
        auto noise = base;
        noise.seed = base.seed + k;
        try {
          const auto run = simulate(p.graph, p.x0, noise, p.config);
          runs[k] = simulation_summary(p.graph, run, pol);
          runs[k]["seed"] = noise.seed;
        } catch (const std::exception& e) {
          std::lock_guard lock(failure_mutex);
          failure = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, std::min(a.threads, a.seeds)); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (!failure.empty()) throw NumericError(failure, 0.0);
    j["runs"] = runs;
    emit(j);
    return ok;
  } else {
    tr = simulate(p.graph, p.x0, p.disturbance, p.config);
  }
  j.update(simulation_summary(p.graph, tr, pol));
  if (!a.out.empty()) {
    write_file(a.out, trajectory_to_csv(tr));
    j["csv"] = a.out;
  }
  if (!a.svg.empty()) {
    PlotOptions opt;
    opt.title = p.label;
    opt.envelope_rate = pol.value;
    write_file(a.svg, trajectory_to_svg(tr, opt));
    j["svg"] = a.svg;
  }
  emit(j);
  return ok;
}

// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string graph;
  std::string traj;
  std::string mode = "simulated";
  double tol = -1;
  std::vector<double> breakpoints;
};

int cmd_verify(const VerifyArgs& a) {
  const auto g = read_graph(a.graph);
  const auto tr = trajectory_from_csv(read_file(a.traj));
  if (tr.agents() != g.size()) throw InputError("trajectory has " + std::to_string(tr.agents()) +
                                                " agents but the graph has " + std::to_string(g.size()));
  if (tr.size() < 2) throw InputError("trajectory needs at least 2 samples");

  // Largest spacing between samples.
  double h = 0;
  for (Index k = 1; k < tr.size(); ++k) h = std::max(h, tr.times[k] - tr.times[k - 1]);
  const double L = g.max_in_strength();
  const bool analytic = a.mode == "analytic";
  const double eq_tol = analytic ? 0.0 : 10 * h * L;
  const double deriv_tol = a.tol >= 0 ? a.tol : analytic ? 1e-9 : 2 * h * L;
  const double extremal_tol = analytic ? deriv_tol : std::max(deriv_tol, 2 * L);
  const double envelope_tol = analytic ? 1e-9 : 4 * (L + g.max_disturbance_bound()) * h;

  const auto inclusion = check_inclusion(g, tr, eq_tol, deriv_tol, a.breakpoints);
  const auto bounds = extremal_derivative_bounds(g, tr, eq_tol, extremal_tol, a.breakpoints);
  const auto pol = polarization(g);

  ojson env;
  bool env_pass = true;
  if (pol.exact) {
    const double excess = envelope_excess(tr, pol.value);
    env_pass = excess <= envelope_tol;
    env = {{"pass", env_pass},
           {"polarization_index", pol.value},
           {"excess", excess},
           {"tolerance", envelope_tol}};
  } else {
    env = {{"pass", true}, {"skipped", "polarization index is only a lower bound"}, {"polarization_index", pol.value}};
  }

  ojson j;
  j["pass"] = inclusion.pass && bounds.pass && env_pass;
  j["mode"] = a.mode;
  j["samples"] = tr.size();
  j["eq_tol"] = eq_tol;
  j["inclusion"] = to_json(inclusion);
  j["extremal_bounds"] = to_json(bounds);
  j["envelope"] = env;
  emit(j);
  return j["pass"].get<bool>() ? ok : verify_failed;
}

// ---------------------------------------------------------------------------

int cmd_split(const std::string& path, const std::string& out) {
  const auto g = read_graph(path);
  const auto [s, map] = split_nodes(g);
  ojson fwd = ojson::array(), back = ojson::array();
  for (const auto& subs : map.forward) {
    auto row = ojson::array();
    for (Index k : subs) row.push_back(k + 1);
    fwd.push_back(row);
  }
  for (Index i : map.backward) back.push_back(i + 1);
  ojson doc;
  doc["graph"] = graph_to_json(s);
  doc["split_map"] = {{"forward", fwd}, {"backward", back}};
  if (out.empty()) {
    emit(doc);
  } else {
    write_file(out, doc.dump(2) + "\n");
    emit({{"n_original", g.size()}, {"n_split", s.size()}, {"out", out}});
  }
  return ok;
}

struct GenerateArgs {
  Index n = 10;
  int max_weight = 9;
  double density = 0.5;
  std::uint64_t seed = 0;
  bool self_loops = false;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  const auto g = random_graph(a.n, a.max_weight, a.density, a.self_loops, a.seed);
  if (a.out.empty()) {
    emit(graph_to_json(g));
  } else {
    write_file(a.out, graph_to_json(g).dump() + "\n");
    emit({{"n", g.size()}, {"out", a.out}});
  }
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signum consensus analysis: indices, simulation and trajectory verification"};
  app.require_subcommand(1);
  const unsigned env_threads = default_threads();

  IndexArgs ia;
  ia.threads = env_threads;
  auto* index = app.add_subcommand("index", "polarization index of a graph");
  index->add_option("--graph", ia.graph, "graph JSON")->required()->check(CLI::ExistingFile);
  index->add_option("--method", ia.method, "auto|exhaustive|bnb")
      ->check(CLI::IsMember({"auto", "exhaustive", "bnb"}));
  index->add_option("--threads", ia.threads, "search threads (default $POLARIX_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  index->add_option("--time-budget", ia.time_budget, "seconds, 0 = unlimited")->check(CLI::NonNegativeNumber);
  index->add_flag("--force", ia.force, "allow exhaustive enumeration above 16 nodes");

  std::string comm_graph, comm_set;
  auto* comm = app.add_subcommand("communities", "strong communities and satisfactory partitions");
  comm->add_option("--graph", comm_graph, "graph JSON")->required()->check(CLI::ExistingFile);
  comm->add_option("--set", comm_set, "comma-separated 1-based node ids");

  SimulateArgs sa;
  sa.threads = env_threads;
  auto* sim = app.add_subcommand("simulate", "simulate a scenario preset");
  sim->add_option("--preset", sa.preset, "preset JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sa.out, "trajectory CSV");
  sim->add_option("--svg", sa.svg, "SVG plot");
  sim->add_option("--dt", sa.dt, "override time step")->check(CLI::PositiveNumber);
  sim->add_option("--t-end", sa.t_end, "override horizon")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", sa.seed, "override the noise seed")->check(CLI::NonNegativeNumber);
  sim->add_option("--seeds", sa.seeds, "run this many consecutive noise seeds (summaries only)")
      ->check(CLI::PositiveNumber);
  sim->add_option("--threads", sa.threads, "workers for --seeds")->check(CLI::PositiveNumber);

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "check a trajectory CSV against the differential inclusion");
  ver->add_option("--graph", va.graph, "graph JSON")->required()->check(CLI::ExistingFile);
  ver->add_option("--traj", va.traj, "trajectory CSV")->required()->check(CLI::ExistingFile);
  ver->add_option("--mode", va.mode, "simulated|analytic")->check(CLI::IsMember({"simulated", "analytic"}));
  ver->add_option("--tol", va.tol, "derivative tolerance")->check(CLI::NonNegativeNumber);
  ver->add_option("--breakpoints", va.breakpoints, "times where kinks are allowed")->delimiter(',');

  std::string split_graph, split_out;
  auto* split = app.add_subcommand("split", "node-splitting transform for integer weights");
  split->add_option("--graph", split_graph, "graph JSON")->required()->check(CLI::ExistingFile);
  split->add_option("--out", split_out, "output JSON");

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "seeded random integer-weighted graph");
  gen->add_option("--n", ga.n, "agents")->check(CLI::Range(2, 100000));
  gen->add_option("--max-weight", ga.max_weight, "largest weight")->check(CLI::PositiveNumber);
  gen->add_option("--density", ga.density, "edge probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", ga.seed, "seed");
  gen->add_flag("--self-loops", ga.self_loops, "sample diagonal entries too");
  gen->add_option("--out", ga.out, "output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : input_error;
  }

  try {
    if (*index) return cmd_index(ia);
    if (*comm) return cmd_communities(comm_graph, comm_set);
    if (*sim) return cmd_simulate(sa);
    if (*ver) return cmd_verify(va);
    if (*split) return cmd_split(split_graph, split_out);
    if (*gen) return cmd_generate(ga);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure at t=" << e.time() << ": " << e.what() << '\n';
    return numeric_failure;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  } catch (const SizeLimitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  }
  return input_error;
}
