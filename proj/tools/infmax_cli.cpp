// infmax command line: ingestion, solvers, evaluation, and reports.
//
// Exit codes: 0 ok, 2 usage, 3 input, 4 infeasible budget, 5 cap exceeded.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "infmax/adaptive.hpp"
#include "infmax/greedy.hpp"
#include "infmax/oracle.hpp"
#include "infmax/rr.hpp"
#include "infmax/saic.hpp"
#include "infmax/text_io.hpp"

using json = nlohmann::json;
using namespace infmax;

namespace {

struct CommonArgs {
  std::string graph_path;
  bool weighted_cascade = false;
  std::optional<uint64_t> seed;
  int threads = 0;
  std::string report_path;
  std::string trace_path;
  std::string labels_out;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--graph", args.graph_path, "edge list file (`u v [p]`, # comments)")
      ->required();
  cmd->add_flag("--weighted-cascade", args.weighted_cascade,
                "ignore listed probabilities and use 1/indegree(v)");
  cmd->add_option("--seed", args.seed, "RNG seed; drawn fresh and recorded when omitted");
  cmd->add_option("--threads", args.threads, "worker cap (0 = hardware)");
  cmd->add_option("--report", args.report_path, "write the JSON report here");
  cmd->add_option("--trace", args.trace_path, "write line-delimited trace records here");
  cmd->add_option("--labels-out", args.labels_out, "write the node label table here");
}

GraphLoadResult load_graph(const CommonArgs& args) {
  std::ifstream in(args.graph_path);
  if (!in) throw InputError("cannot open graph file `" + args.graph_path + "`");
  auto res = from_edge_list(in, args.weighted_cascade);
  if (!args.labels_out.empty()) {
    std::ofstream out(args.labels_out);
    if (!out) throw InputError("cannot write label table `" + args.labels_out + "`");
    write_label_table(out, res.labels);
  }
  return res;
}

uint64_t resolve_seed(const CommonArgs& args) {
  if (args.seed) return *args.seed;
  std::random_device rd;
  return (static_cast<uint64_t>(rd()) << 32) ^ rd();
}

DelayDist parse_delay_flag(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw InputError("delay must be exp:<rate> or const:<value>");
  std::string kind = s.substr(0, colon);
  double param = 0;
  try {
    param = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw InputError("bad delay parameter in `" + s + "`");
  }
  if (kind == "exp") return DelayDist::exponential(param);
  if (kind == "const") return DelayDist::constant(param);
  throw InputError("unknown delay kind `" + kind + "`");
}

json labels_of(const std::vector<NodeId>& nodes, const std::vector<std::string>& labels) {
  json arr = json::array();
  for (NodeId v : nodes) arr.push_back(labels[v]);
  return arr;
}

json schedule_json(const SeedSchedule& sched, const std::vector<std::string>& labels) {
  json arr = json::array();
  for (const auto& round : sched.rounds) arr.push_back(labels_of(round, labels));
  return arr;
}

json spread_json(const SpreadEstimate& est) {
  return {{"mean", est.mean}, {"stderr", est.stderr_}, {"samples", est.samples}};
}

class ReportWriter {
 public:
  ReportWriter(std::string command, uint64_t seed) {
    doc_["schema_version"] = 1;
    doc_["tool"] = "infmax";
    doc_["command"] = std::move(command);
    doc_["parameters"]["seed"] = seed;
    start_ = std::chrono::steady_clock::now();
  }

  json& parameters() { return doc_["parameters"]; }
  json& result() { return doc_["result"]; }

  void finish(const std::string& path) {
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
    doc_["timing"] = {{"wall_seconds", elapsed.count()}};
    if (!path.empty()) {
      std::ofstream out(path);
      if (!out) throw InputError("cannot write report `" + path + "`");
      out << doc_.dump(2) << '\n';
    }
  }

  const json& doc() const { return doc_; }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

void print_summary_line(const std::string& key, const json& value) {
  std::cout << "  " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
            << '\n';
}

void print_summary(const ReportWriter& report) {
  const json& doc = report.doc();
  std::cout << doc["command"].get<std::string>() << " done (seed "
            << doc["parameters"]["seed"].get<uint64_t>() << ")\n";
  for (auto it = doc["result"].begin(); it != doc["result"].end(); ++it) {
    if (it.key() == "pick_log" || it.key() == "runs") continue;
    print_summary_line(it.key(), it.value());
  }
}

SeedSchedule load_schedule(const std::string& path, const GraphLoadResult& loaded,
                           uint32_t min_rounds, uint32_t budget) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open schedule `" + path + "`");
  auto idx = label_index(loaded.labels);
  SeedSchedule sched = parse_schedule(in, idx, min_rounds, budget);
  return sched;
}

// ---- subcommands ----

int run_eval(const CommonArgs& common, const std::string& schedule_path, size_t samples,
             const std::string& name) {
  auto loaded = load_graph(common);
  uint64_t seed = resolve_seed(common);
  ReportWriter report(name, seed);
  report.parameters()["samples"] = samples;
  report.parameters()["schedule"] = schedule_path;

  SeedSchedule sched = load_schedule(schedule_path, loaded, 0, 0);
  sched.validate(loaded.graph);
  Rng rng(seed);
  McOptions opts;
  opts.threads = common.threads;
  auto est = estimate_rho(loaded.graph, sched, samples, rng, opts);
  report.result()["spread"] = spread_json(est);
  report.result()["rounds"] = sched.horizon();

  if (name == "simulate" && !common.trace_path.empty()) {
    std::ofstream trace(common.trace_path);
    if (!trace) throw InputError("cannot write trace `" + common.trace_path + "`");
    Rng trace_rng = Rng(seed).substream(1);
    for (size_t i = 0; i < std::min<size_t>(samples, 100); ++i) {
      auto activated = simulate_schedule(loaded.graph, sched, trace_rng);
      json line = {{"run", i}, {"activated", labels_of(activated, loaded.labels)}};
      trace << line.dump() << '\n';
    }
  }

  report.finish(common.report_path);
  print_summary(report);
  return 0;
}

int run_mrim(const CommonArgs& common, const std::string& mode, const std::string& algo,
             uint32_t T, uint32_t k, double eps, double ell, uint64_t mc_samples, bool lazy,
             size_t eval_samples) {
  auto loaded = load_graph(common);
  const DirectedGraph& g = loaded.graph;
  if (k > g.num_nodes()) throw InfeasibleError("budget k exceeds node count");
  uint64_t seed = resolve_seed(common);
  ReportWriter report("mrim", seed);
  report.parameters()["mode"] = mode;
  report.parameters()["algo"] = algo;
  report.parameters()["rounds"] = T;
  report.parameters()["budget"] = k;
  report.parameters()["epsilon"] = eps;
  report.parameters()["ell"] = ell;

  Rng rng(seed);
  SeedSchedule schedule;
  if (algo == "greedy") {
    uint64_t R = mc_samples > 0 ? mc_samples : simulation_count(k, g.num_nodes(), ell, T, eps);
    report.parameters()["mc_samples_per_eval"] = R;
    GreedyOptions opts;
    opts.threads = common.threads;
    opts.lazy = lazy;
    auto eval = make_mc_evaluator(g, R, rng.next(), McOptions{common.threads, false});
    GreedyResult res = mode == "within" ? double_greedy(g, T, k, eval, opts)
                                        : global_greedy(g, T, k, eval, opts);
    schedule = res.schedule;
    report.result()["evaluations"] = res.evaluations;
    json picks = json::array();
    for (const auto& p : res.picks)
      picks.push_back({{"round", p.round},
                       {"node", loaded.labels[p.node]},
                       {"gain", p.gain},
                       {"zero_gain", p.zero_gain}});
    report.result()["pick_log"] = picks;
  } else {
    auto res = mrim_imm(g, T, k, eps, ell, mode == "within", rng, common.threads);
    schedule = res.schedule;
    report.result()["theta"] = res.phase1.theta;
    report.result()["lb"] = res.phase1.lb;
    report.result()["lambda_star"] = res.params.lambda_star;
    report.result()["rr_samples"] = res.phase1.samples;
    report.result()["coverage_spread_estimate"] = res.spread_estimate;
  }

  report.result()["seeds_per_round"] = schedule_json(schedule, loaded.labels);
  Rng eval_rng = Rng(seed).substream(0xEA51);
  McOptions mc;
  mc.threads = common.threads;
  auto est = estimate_rho(g, schedule, eval_samples, eval_rng, mc);
  report.result()["spread"] = spread_json(est);
  report.finish(common.report_path);
  print_summary(report);
  return 0;
}

int run_adaptive_cmd(const CommonArgs& common, const std::string& algo, uint32_t T, uint32_t k,
                     size_t trials, double eps, double ell, uint64_t mc_samples,
                     bool incremental) {
  auto loaded = load_graph(common);
  const DirectedGraph& g = loaded.graph;
  if (k > g.num_nodes()) throw InfeasibleError("budget k exceeds node count");
  uint64_t seed = resolve_seed(common);
  ReportWriter report("adaptive", seed);
  report.parameters()["algo"] = algo;
  report.parameters()["rounds"] = T;
  report.parameters()["budget"] = k;
  report.parameters()["trials"] = trials;
  report.parameters()["epsilon"] = eps;
  report.parameters()["ell"] = ell;
  report.parameters()["incremental"] = incremental;

  PolicyFactory factory;
  if (algo == "greedy") {
    uint64_t R = mc_samples > 0 ? mc_samples : simulation_count(k, g.num_nodes(), ell, T, eps);
    report.parameters()["mc_samples_per_eval"] = R;
    factory = make_ada_greedy_policy(R, 1);
  } else {
    AdaImmOptions opts;
    opts.threads = 1;
    opts.incremental = incremental;
    factory = make_ada_imm_policy(eps, ell, T, opts);
  }

  Rng rng(seed);
  RunOptions run_opts;
  run_opts.threads = common.threads;
  auto ev = run_adaptive(g, factory, T, k, trials, rng, run_opts);
  report.result()["f_avg"] = {{"mean", ev.mean}, {"stderr", ev.stderr_}, {"trials", ev.trials}};

  if (!common.trace_path.empty()) {
    std::ofstream trace(common.trace_path);
    if (!trace) throw InputError("cannot write trace `" + common.trace_path + "`");
    for (size_t i = 0; i < ev.runs.size(); ++i) {
      const auto& run = ev.runs[i];
      for (uint32_t t = 1; t <= T; ++t) {
        const RoundTrace& rt = run.feedback.traces()[t - 1];
        json line = {{"trial", i},
                     {"round", t},
                     {"seeds", labels_of(rt.seeds, loaded.labels)},
                     {"newly_activated", labels_of(rt.newly_activated, loaded.labels)},
                     {"cumulative_active", run.round_gains.empty()
                                               ? 0
                                               : [&] {
                                                   uint32_t c = 0;
                                                   for (uint32_t j = 0; j < t; ++j)
                                                     c += run.round_gains[j];
                                                   return c;
                                                 }()}};
        trace << line.dump() << '\n';
      }
    }
  }

  report.finish(common.report_path);
  print_summary(report);
  return 0;
}

int run_saic(const CommonArgs& common, const std::string& problem, uint32_t k, double eps,
             double ell, const std::string& profile_path, std::optional<int> q_case,
             double q_base, const std::string& delay_flag, size_t eval_samples) {
  auto loaded = load_graph(common);
  const DirectedGraph& g = loaded.graph;
  if (k > g.num_nodes()) throw InfeasibleError("budget k exceeds node count");
  uint64_t seed = resolve_seed(common);
  ReportWriter report("saic", seed);
  report.parameters()["problem"] = problem;
  report.parameters()["budget"] = k;
  report.parameters()["epsilon"] = eps;
  report.parameters()["ell"] = ell;

  ProfileConfig cfg;
  if (!profile_path.empty()) {
    std::ifstream in(profile_path);
    if (!in) throw InputError("cannot open profile `" + profile_path + "`");
    cfg = parse_profile(in);
    report.parameters()["profile"] = profile_path;
  } else {
    cfg.q_case = q_case;
    cfg.q_base = q_base;
    if (!delay_flag.empty()) {
      cfg.self_delay = parse_delay_flag(delay_flag);
      cfg.edge_delay = cfg.self_delay;
    }
    report.parameters()["q_case"] = q_case ? json(*q_case) : json(nullptr);
    report.parameters()["q_base"] = q_base;
    report.parameters()["delay"] = delay_flag.empty() ? "exp:1" : delay_flag;
  }

  Rng rng(seed);
  Rng profile_rng = rng.substream(0x9F0F);
  auto prof = materialize_profile(cfg, g, loaded.labels, profile_rng);
  auto ed = materialize_edge_delays(cfg, g);

  SaicImmOptions opts;
  opts.threads = common.threads;
  SaicImmResult res;
  SaicObjective objective;
  if (problem == "bim") {
    res = imm_bim(g, prof, k, eps, ell, rng, opts);
    objective = SaicObjective::SigmaB;
    report.result()["covered_external"] = res.covered_external;
  } else if (problem == "bpim") {
    res = imm_bpim(g, prof, ed, k, eps, ell, rng, opts);
    objective = SaicObjective::RhoB;
  } else {
    res = imm_pim(g, prof, ed, k, eps, ell, rng, opts);
    objective = SaicObjective::Rho;
  }

  report.result()["seeds"] = labels_of(res.seeds, loaded.labels);
  report.result()["theta"] = res.phase1.theta;
  report.result()["lb"] = res.phase1.lb;
  report.result()["lambda"] = res.params.selection_lambda();
  report.result()["rr_samples"] = res.phase1.samples;
  report.result()["coverage_spread_estimate"] = res.spread_estimate;
  report.result()["warnings"] = res.warnings;

  Rng eval_rng = Rng(seed).substream(0xEA51);
  McOptions mc;
  mc.threads = common.threads;
  auto est =
      estimate_objective(g, prof, ed, objective, res.seeds, eval_samples, eval_rng, mc);
  report.result()["objective_estimate"] = spread_json(est);
  report.finish(common.report_path);
  print_summary(report);
  return 0;
}

int run_oracle(const CommonArgs& common, const std::string& op, const std::string& schedule_path,
               std::vector<std::string> seed_labels, uint32_t T, uint32_t k,
               const std::string& profile_path) {
  auto loaded = load_graph(common);
  const DirectedGraph& g = loaded.graph;
  uint64_t seed = resolve_seed(common);
  ReportWriter report("oracle", seed);
  report.parameters()["op"] = op;

  auto idx = label_index(loaded.labels);
  std::vector<NodeId> seeds;
  for (const auto& label : seed_labels) {
    auto it = idx.find(label);
    if (it == idx.end()) throw InputError("unknown node `" + label + "`");
    seeds.push_back(it->second);
  }
  std::sort(seeds.begin(), seeds.end());

  if (op == "sigma") {
    report.result()["value"] = oracle::exact_sigma(g, seeds);
  } else if (op == "rho") {
    SeedSchedule sched = load_schedule(schedule_path, loaded, 0, 0);
    report.result()["value"] = oracle::exact_rho_mrt(g, sched);
  } else if (op == "sigma-b") {
    ProfileConfig cfg;
    if (!profile_path.empty()) {
      std::ifstream in(profile_path);
      if (!in) throw InputError("cannot open profile `" + profile_path + "`");
      cfg = parse_profile(in);
    }
    Rng rng(seed);
    auto prof = materialize_profile(cfg, g, loaded.labels, rng);
    report.result()["value"] = oracle::exact_sigma_b(g, prof.q, seeds);
  } else if (op == "opt-schedule") {
    oracle::MembershipTable table(g);
    auto res = oracle::exhaustive_opt_schedule(g, T, k, table.evaluator());
    report.result()["value"] = res.value;
    report.result()["best_schedule"] = schedule_json(res.best, loaded.labels);
    report.result()["candidates"] = res.candidates;
  } else {
    throw InputError("unknown oracle op `" + op + "`");
  }
  report.finish(common.report_path);
  print_summary(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-round and self-activation influence maximization"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string schedule_path, mode = "within", algo = "greedy", problem = "pim";
  std::string profile_path, delay_flag, oracle_op = "sigma";
  std::vector<std::string> seed_labels;
  uint32_t T = 1, k = 1;
  double eps = 0.1, ell = 1.0, q_base = 1.0;
  uint64_t mc_samples = 0;
  size_t samples = 10000, trials = 100;
  std::optional<int> q_case;
  bool lazy = false, incremental = false;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo evaluation of a seed schedule");
  add_common(sim, common);
  sim->add_option("--schedule", schedule_path, "schedule file (`t u1 u2 ...`)")->required();
  sim->add_option("--samples", samples, "simulation count");

  auto* eval = app.add_subcommand("eval", "spread estimate for a schedule");
  add_common(eval, common);
  eval->add_option("--schedule", schedule_path)->required();
  eval->add_option("--samples", samples);

  auto* mrim = app.add_subcommand("mrim", "non-adaptive multi-round seed selection");
  add_common(mrim, common);
  mrim->add_option("--mode", mode, "within|cross")->check(CLI::IsMember({"within", "cross"}));
  mrim->add_option("--algo", algo, "greedy|imm")->check(CLI::IsMember({"greedy", "imm"}));
  mrim->add_option("--rounds", T, "number of rounds T")->required();
  mrim->add_option("--budget", k, "per-round budget k")->required();
  mrim->add_option("--epsilon", eps);
  mrim->add_option("--ell", ell);
  mrim->add_option("--mc-samples", mc_samples, "simulations per estimate (0 = theorem formula)");
  mrim->add_flag("--lazy", lazy, "CELF-style lazy evaluation");
  mrim->add_option("--samples", samples, "final spread evaluation samples");

  auto* ada = app.add_subcommand("adaptive", "adaptive multi-round seeding");
  add_common(ada, common);
  ada->add_option("--algo", algo, "greedy|imm")->check(CLI::IsMember({"greedy", "imm"}));
  ada->add_option("--rounds", T)->required();
  ada->add_option("--budget", k)->required();
  ada->add_option("--trials", trials, "independent adaptive runs");
  ada->add_option("--epsilon", eps);
  ada->add_option("--ell", ell);
  ada->add_option("--mc-samples", mc_samples);
  ada->add_flag("--incremental", incremental, "reuse RR sets across rounds");

  auto* saic = app.add_subcommand("saic", "self-activation IC seed selection");
  add_common(saic, common);
  saic->add_option("--problem", problem, "bim|bpim|pim")
      ->check(CLI::IsMember({"bim", "bpim", "pim"}));
  saic->add_option("--k,--budget", k, "budget")->required();
  saic->add_option("--epsilon", eps);
  saic->add_option("--ell", ell);
  saic->add_option("--profile", profile_path, "profile config file");
  saic->add_option("--q-case", q_case, "synthetic q case 0..4");
  saic->add_option("--q-base", q_base, "base draw upper bound c");
  saic->add_option("--delay", delay_flag, "exp:<rate> or const:<value>");
  saic->add_option("--samples", samples, "objective evaluation samples");

  auto* orc = app.add_subcommand("oracle", "exact desk-scale reference values");
  add_common(orc, common);
  orc->add_option("--op", oracle_op, "sigma|rho|sigma-b|opt-schedule");
  orc->add_option("--schedule", schedule_path);
  orc->add_option("--seeds", seed_labels, "seed node labels");
  orc->add_option("--rounds", T);
  orc->add_option("--budget", k);
  orc->add_option("--profile", profile_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    set_thread_cap(common.threads);
    if (sim->parsed()) return run_eval(common, schedule_path, samples, "simulate");
    if (eval->parsed()) return run_eval(common, schedule_path, samples, "eval");
    if (mrim->parsed())
      return run_mrim(common, mode, algo, T, k, eps, ell, mc_samples, lazy, samples);
    if (ada->parsed())
      return run_adaptive_cmd(common, algo, T, k, trials, eps, ell, mc_samples, incremental);
    if (saic->parsed())
      return run_saic(common, problem, k, eps, ell, profile_path, q_case, q_base, delay_flag,
                      samples);
    if (orc->parsed())
      return run_oracle(common, oracle_op, schedule_path, seed_labels, T, k, profile_path);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const CapExceededError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 5;
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
