// gridfire: plan multi-period preemptive de-energization under wildfire
// uncertainty. Subcommands: simulate | solve | evaluate | benchmark |
// sensitivity | interact | plot.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "gridfire/artifacts.hpp"
#include "gridfire/benchmarks.hpp"
#include "gridfire/decomposition.hpp"
#include "gridfire/evaluation.hpp"
#include "gridfire/plot.hpp"

namespace fs = std::filesystem;
using namespace gridfire;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitSolver = 4;

struct Common {
  std::string case_path;
  std::string env_path;
  std::string out_dir = ".";
  double cell_size = 1000.0;
  std::string solver = "auto";
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& c, bool needs_env = false) {
  cmd->add_option("--case", c.case_path, "case file (gridfire-case/1 JSON)")
      ->required();
  if (needs_env)
    cmd->add_option("--env", c.env_path, "environment raster CSV (optional)");
  cmd->add_option("--out", c.out_dir, "output directory");
  cmd->add_option("--cell-size", c.cell_size, "grid cell edge length in meters")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--solver", c.solver, "MILP backend: auto|builtin|glpk");
  cmd->add_option("--threads", c.threads, "worker threads");
}

struct World {
  PowerCase pc;
  GridGeometry geom;
  CellMaps maps;
  EnvLayers env;
  std::string hash;
};

World load_world(const Common& c) {
  World w{load_case(c.case_path), {}, {}, {}, ""};
  w.hash = case_fingerprint(w.pc);
  std::tie(w.geom, w.maps) = build_grid(w.pc, c.cell_size);
  w.env = c.env_path.empty() ? EnvLayers::uniform(w.geom)
                             : load_env_csv(c.env_path, w.geom);
  return w;
}

std::string out_path(const Common& c, const std::string& name) {
  fs::create_directories(c.out_dir);
  return (fs::path(c.out_dir) / name).string();
}

std::vector<DisruptionScenario> load_matching_scenarios(const std::string& path,
                                                        const std::string& case_hash,
                                                        int horizon) {
  ScenarioFile f = read_scenarios(path);
  if (f.case_hash != case_hash)
    throw ValidationError("scenario file " + path + " was produced for a different case");
  if (f.horizon != horizon)
    throw ValidationError("scenario file horizon does not match the case");
  // normalize component-vector lengths (records store sparse ids only)
  return f.scenarios;
}

void fit_scenarios(std::vector<DisruptionScenario>& scen, int nc) {
  for (DisruptionScenario& sc : scen) {
    sc.exo_damage.resize(nc, 0);
    sc.fault.resize(nc, 0);
    sc.affected.resize(nc);
  }
}

ShutoffPlan load_matching_plan(const std::string& path, const std::string& case_hash,
                               const PowerCase& pc) {
  PlanFile pf = read_plan(path);
  if (pf.case_hash != case_hash)
    throw ValidationError("plan file " + path + " was produced for a different case");
  validate_plan(pc, pf.plan);
  return pf.plan;
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

int cmd_simulate(const Common& c, int n, uint64_t seed, bool exo, bool endo) {
  World w = load_world(c);
  SimulationOptions opts;
  opts.count = n;
  opts.seed = seed;
  opts.exogenous = exo;
  opts.endogenous = endo;
  opts.threads = c.threads;
  auto scen = generate_scenarios(w.pc, w.geom, w.maps, w.env, opts);

  int disrupted = 0;
  for (const auto& sc : scen) disrupted += sc.disrupted(w.pc.horizon);
  ScenarioFile file{w.hash, seed, c.cell_size, w.pc.horizon, exo, endo, w.geom, scen};
  const std::string path = out_path(c, "scenarios.jsonl");
  write_scenarios(path, file);
  write_manifest(out_path(c, "manifest.json"), "simulate", w.hash, {path});
  std::cout << "wrote " << scen.size() << " scenarios (" << disrupted << " disruptive, "
            << (100.0 * disrupted / std::max(1, (int)scen.size()))
            << "% disruption rate) to " << path << "\n";
  return 0;
}

int cmd_solve(const Common& c, const std::string& scen_path, double epsilon,
              double delta, const std::string& cut, bool extensive, bool resume,
              int max_iters) {
  World w = load_world(c);
  auto scen = load_matching_scenarios(scen_path, w.hash, w.pc.horizon);
  fit_scenarios(scen, w.pc.component_count());

  const std::string plan_path = out_path(c, "plan.json");
  const std::string bounds_path = out_path(c, "bounds.csv");
  if (extensive) {
    ExtensiveModel em = build_extensive(w.pc, scen, ObjectiveMode::Expectation);
    auto solver = make_solver(solver_choice_from_string(c.solver));
    SolveResult res = solver->solve(em.model, {1e-6, kInf});
    if (!res.has_solution()) throw SolverError("extensive form did not solve");
    ShutoffPlan plan = extract_plan(w.pc, em.first_stage, res.values);
    write_plan(plan_path, plan, w.hash, res.objective, res.gap);
    std::vector<BoundsRecord> log{{1, res.objective, res.objective, plan_hash(plan),
                                   res.wall_seconds}};
    write_bounds_csv(bounds_path, log);
    write_manifest(out_path(c, "manifest.json"), "solve --extensive", w.hash,
                   {plan_path, bounds_path});
    std::cout << "extensive optimum " << res.objective << "\n";
    return 0;
  }

  DecompositionOptions opts;
  opts.epsilon = epsilon;
  opts.delta = delta;
  opts.mode = cut == "smc" ? CutMode::SMC : CutMode::LC;
  opts.solver = solver_choice_from_string(c.solver);
  opts.threads = c.threads;
  opts.max_iterations = max_iters;
  opts.checkpoint_path = out_path(c, "checkpoint.json");
  opts.resume = resume;
  DecompositionResult res = run_decomposition(w.pc, scen, opts);
  write_plan(plan_path, res.incumbent, w.hash, res.upper, res.gap);
  write_bounds_csv(bounds_path, res.log);
  write_manifest(out_path(c, "manifest.json"), "solve", w.hash,
                 {plan_path, bounds_path, opts.checkpoint_path});
  std::cout << "decomposition " << (res.converged ? "converged" : "stopped") << " after "
            << res.iterations << " iterations: objective " << res.upper
            << ", bound " << res.lower << ", gap " << res.gap << "\n";
  if (!res.converged) return kExitSolver;
  return 0;
}

int cmd_evaluate(const Common& c, const std::string& plan_path,
                 const std::string& scen_path, double ref_gn,
                 const std::string& saa_sizes, int saa_replicates, int saa_eval,
                 uint64_t seed, double epsilon) {
  World w = load_world(c);
  EvaluateOptions eopts;
  eopts.solver = solver_choice_from_string(c.solver);
  eopts.threads = c.threads;

  if (!saa_sizes.empty()) {
    SaaOptions opts;
    opts.sizes = parse_int_list(saa_sizes);
    opts.replicates = saa_replicates;
    opts.eval_count = saa_eval;
    opts.seed = seed;
    opts.threads = c.threads;
    opts.solve.solver = eopts.solver;
    opts.solve.epsilon = epsilon;
    SaaStudy study = saa_study(w.pc, w.geom, w.maps, w.env, opts);
    const std::string jpath = out_path(c, "saa.json");
    const std::string cpath = out_path(c, "saa.csv");
    write_saa_json(jpath, study, w.hash);
    write_saa_csv(cpath, study);
    write_manifest(out_path(c, "manifest.json"), "evaluate --saa", w.hash,
                   {jpath, cpath});
    std::cout << "SAA study: " << study.rows.size() << " sizes x " << saa_replicates
              << " replicates written to " << cpath << "\n";
    return 0;
  }

  if (plan_path.empty() || scen_path.empty())
    throw ValidationError("evaluate needs --plan and --scenarios (or --saa-sizes)");
  ShutoffPlan plan = load_matching_plan(plan_path, w.hash, w.pc);
  auto scen = load_matching_scenarios(scen_path, w.hash, w.pc.horizon);
  fit_scenarios(scen, w.pc.component_count());
  EvaluationReport rep = evaluate_plan(w.pc, plan, scen, "plan", eopts);
  if (ref_gn > 0.0) rep.rri = relative_improvement(rep, ref_gn);
  const std::string path = out_path(c, "evaluation.json");
  write_evaluation_json(path, rep, w.hash);
  write_manifest(out_path(c, "manifest.json"), "evaluate", w.hash, {path});
  std::cout << "g_n = " << rep.g_n << " (nondisr " << rep.nondisruptive_shed
            << ", disr shed " << rep.disruptive_shed << ", damage "
            << rep.disruptive_damage << ", worst " << rep.worst_case << ")\n";
  return 0;
}

int cmd_benchmark(const Common& c, const std::string& scen_path,
                  const std::string& plan_path, const std::string& eval_path,
                  const std::string& alphas_csv) {
  World w = load_world(c);
  auto train = load_matching_scenarios(scen_path, w.hash, w.pc.horizon);
  fit_scenarios(train, w.pc.component_count());
  auto eval_set = train;
  if (!eval_path.empty()) {
    eval_set = load_matching_scenarios(eval_path, w.hash, w.pc.horizon);
    fit_scenarios(eval_set, w.pc.component_count());
  }
  BenchmarkOptions bopts;
  bopts.solver = solver_choice_from_string(c.solver);
  bopts.threads = c.threads;
  EvaluateOptions eopts;
  eopts.solver = bopts.solver;
  eopts.threads = c.threads;

  std::vector<ReportRow> rows;
  std::vector<std::string> outputs;
  double ref_gn = 0.0;
  std::optional<EvaluationReport> star_rep;
  if (!plan_path.empty()) {
    ShutoffPlan star = load_matching_plan(plan_path, w.hash, w.pc);
    star_rep = evaluate_plan(w.pc, star, eval_set, "star", eopts);
    ref_gn = star_rep->g_n;
  }

  auto guard = [&](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      std::cerr << "benchmark " << what << " failed: " << e.what() << "\n";
    }
  };

  EvaluationReport det_rep;
  guard("det", [&] {
    BenchmarkResult det = solve_deterministic(w.pc, bopts);
    det_rep = evaluate_plan(w.pc, det.plan, eval_set, "det", eopts);
    if (ref_gn == 0.0) ref_gn = det_rep.g_n;
    rows.push_back(report_row_from(det_rep, "det", std::nullopt, ref_gn));
    const std::string p = out_path(c, "eval_det.json");
    write_evaluation_json(p, det_rep, w.hash);
    outputs.push_back(p);
  });
  if (star_rep) {
    rows.push_back(report_row_from(*star_rep, "star", std::nullopt, ref_gn));
    const std::string p = out_path(c, "eval_star.json");
    write_evaluation_json(p, *star_rep, w.hash);
    outputs.push_back(p);
  }
  guard("ws", [&] {
    WaitAndSeeResult ws = solve_wait_and_see(w.pc, eval_set, bopts);
    ReportRow row;
    row.tag = "ws";
    row.g_n = ws.expected;
    row.rri = ref_gn != 0.0 ? (ws.expected - ref_gn) / ref_gn : 0.0;
    row.worst_case = *std::max_element(ws.costs.begin(), ws.costs.end());
    rows.push_back(row);
    std::ofstream wsout(out_path(c, "ws_costs.csv"));
    wsout << "scenario,cost\n";
    for (size_t i = 0; i < ws.costs.size(); ++i) wsout << i << "," << ws.costs[i] << "\n";
    outputs.push_back(out_path(c, "ws_costs.csv"));
  });
  guard("rb", [&] {
    RiskTable table = compute_risk_table(w.pc, train);
    for (double alpha : parse_list(alphas_csv)) {
      BenchmarkResult rb = solve_risk_based(w.pc, table, alpha, bopts);
      EvaluationReport rep = evaluate_plan(w.pc, rb.plan, eval_set, "rb", eopts);
      rows.push_back(report_row_from(rep, "rb", alpha, ref_gn));
    }
  });
  guard("ro", [&] {
    RobustResult ro = solve_robust(w.pc, train, bopts);
    EvaluationReport rep = evaluate_plan(w.pc, ro.plan, eval_set, "ro", eopts);
    rows.push_back(report_row_from(rep, "ro", std::nullopt, ref_gn));
  });

  if (rows.empty()) throw SolverError("every benchmark failed");
  const std::string cpath = out_path(c, "benchmark.csv");
  const std::string jpath = out_path(c, "benchmark.json");
  write_report_csv(cpath, rows);
  write_report_json(jpath, rows, w.hash);
  outputs.push_back(cpath);
  outputs.push_back(jpath);
  write_manifest(out_path(c, "manifest.json"), "benchmark", w.hash, outputs);
  std::cout << "wrote " << rows.size() << " benchmark rows to " << cpath << "\n";
  return 0;
}

int cmd_sensitivity(const Common& c, const std::string& scen_path,
                    const std::string& eval_path, const std::string& dps_csv,
                    double epsilon) {
  World w = load_world(c);
  auto base = load_matching_scenarios(scen_path, w.hash, w.pc.horizon);
  fit_scenarios(base, w.pc.component_count());
  auto eval_set = base;
  if (!eval_path.empty()) {
    eval_set = load_matching_scenarios(eval_path, w.hash, w.pc.horizon);
    fit_scenarios(eval_set, w.pc.component_count());
  }
  DecompositionOptions sopts;
  sopts.epsilon = epsilon;
  sopts.solver = solver_choice_from_string(c.solver);
  sopts.threads = c.threads;
  EvaluateOptions eopts;
  eopts.solver = sopts.solver;
  eopts.threads = c.threads;
  auto rows = sensitivity_dp(w.pc, base, parse_list(dps_csv), eval_set, sopts, eopts);
  const std::string path = out_path(c, "sensitivity.csv");
  write_sensitivity_csv(path, rows);
  write_manifest(out_path(c, "manifest.json"), "sensitivity", w.hash, {path});
  std::cout << "wrote " << rows.size() << " sensitivity rows to " << path << "\n";
  return 0;
}

int cmd_interact(const Common& c, int n, int eval_n, uint64_t seed, double epsilon) {
  World w = load_world(c);
  DecompositionOptions sopts;
  sopts.epsilon = epsilon;
  sopts.solver = solver_choice_from_string(c.solver);
  sopts.threads = c.threads;
  EvaluateOptions eopts;
  eopts.solver = sopts.solver;
  eopts.threads = c.threads;
  InteractionStudy study =
      interaction_study(w.pc, w.geom, w.maps, w.env, n, eval_n, seed, sopts, eopts);
  const std::string path = out_path(c, "interaction.csv");
  write_interaction_csv(path, study);
  for (int k = 0; k < 3; ++k)
    write_plan(out_path(c, std::string("plan_") + InteractionStudy::label(k) + ".json"),
               study.plans[k], w.hash, 0.0, 0.0);
  write_manifest(out_path(c, "manifest.json"), "interact", w.hash, {path});
  std::cout << "wrote interaction study to " << path << "\n";
  return 0;
}

int cmd_plot(const Common& c, const std::string& plan_path, int period,
             const std::string& saa_path, const std::string& evals_csv) {
  World w = load_world(c);
  std::vector<std::string> outputs;
  if (!plan_path.empty()) {
    ShutoffPlan plan = load_matching_plan(plan_path, w.hash, w.pc);
    const int t = period > 0 ? period : std::max(1, 2 * w.pc.horizon / 3);
    const std::string path = out_path(c, "network.svg");
    plot_network_svg(path, w.pc, plan, t);
    outputs.push_back(path);
  }
  if (!saa_path.empty()) {
    SaaStudy study = read_saa_json(saa_path);
    if (study.rows.empty()) throw IoError("SAA report has no rows to plot");
    const std::string path = out_path(c, "saa_ci.svg");
    plot_saa_svg(path, study);
    outputs.push_back(path);
  }
  if (!evals_csv.empty()) {
    std::vector<ScatterSeries> series;
    std::stringstream ss(evals_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      std::ifstream in(tok);
      if (!in) throw IoError("cannot open evaluation report: " + tok);
      nlohmann::json j = nlohmann::json::parse(in);
      ScatterSeries s;
      s.label = j.value("tag", tok);
      for (const auto& rec : j.at("per_scenario"))
        s.costs.push_back(rec.at("pre").get<double>() + rec.at("post").get<double>() +
                          rec.at("damage").get<double>());
      series.push_back(std::move(s));
    }
    if (series.empty()) throw IoError("no evaluation reports given");
    const std::string path = out_path(c, "scenario_costs.svg");
    plot_scatter_svg(path, series);
    outputs.push_back(path);
  }
  if (outputs.empty())
    throw ValidationError("plot needs --plan, --saa or --evals");
  write_manifest(out_path(c, "manifest.json"), "plot", w.hash, outputs);
  for (const std::string& o : outputs) std::cout << "wrote " << o << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wildfire-aware de-energization planning"};
  app.require_subcommand(1);

  Common c_sim, c_solve, c_eval, c_bench, c_sens, c_inter, c_plot;

  auto* sim = app.add_subcommand("simulate", "sample wildfire disruption scenarios");
  int sim_n = 100;
  uint64_t sim_seed = 0;
  bool sim_no_exo = false, sim_no_endo = false;
  add_common(sim, c_sim, true);
  sim->add_option("--n", sim_n, "number of scenarios")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_flag("--no-exogenous", sim_no_exo, "mask natural ignitions");
  sim->add_flag("--no-endogenous", sim_no_endo, "mask component faults");

  auto* solve = app.add_subcommand("solve", "solve the two-stage shut-off program");
  std::string solve_scen, solve_cut = "smc";
  double solve_eps = 0.01, solve_delta = 1e-4;
  bool solve_ext = false, solve_resume = false;
  int solve_iters = 500;
  add_common(solve, c_solve);
  solve->add_option("--scenarios", solve_scen, "scenario file")->required();
  solve->add_option("--epsilon", solve_eps, "relative gap tolerance");
  solve->add_option("--delta", solve_delta, "square-minimization anchor tolerance");
  solve->add_option("--cut", solve_cut, "cut family: lc|smc");
  solve->add_option("--max-iterations", solve_iters, "iteration cap");
  solve->add_flag("--extensive", solve_ext, "solve the deterministic equivalent directly");
  solve->add_flag("--resume", solve_resume, "resume from checkpoint.json in --out");

  auto* eval = app.add_subcommand("evaluate", "out-of-sample plan evaluation / SAA study");
  std::string eval_plan, eval_scen, eval_sizes;
  double eval_ref = 0.0, eval_eps = 1e-6;
  int eval_reps = 5, eval_nsamples = 200;
  uint64_t eval_seed = 0;
  add_common(eval, c_eval, true);
  eval->add_option("--plan", eval_plan, "plan file to evaluate");
  eval->add_option("--scenarios", eval_scen, "test scenario file");
  eval->add_option("--reference-gn", eval_ref, "reference cost for the RRI column");
  eval->add_option("--saa-sizes", eval_sizes, "run an SAA study with these sizes");
  eval->add_option("--saa-replicates", eval_reps, "replicates per size");
  eval->add_option("--saa-eval", eval_nsamples, "common evaluation sample count");
  eval->add_option("--seed", eval_seed, "seed for the SAA study");
  eval->add_option("--epsilon", eval_eps, "solver gap for SAA cells");

  auto* bench = app.add_subcommand("benchmark", "compare against det/ws/risk/robust");
  std::string bench_scen, bench_plan, bench_eval, bench_alphas =
      "0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  add_common(bench, c_bench);
  bench->add_option("--scenarios", bench_scen, "in-sample scenario file")->required();
  bench->add_option("--plan", bench_plan, "stochastic plan for the reference row");
  bench->add_option("--eval-scenarios", bench_eval, "out-of-sample test file");
  bench->add_option("--alphas", bench_alphas, "risk-based sweep values");

  auto* sens = app.add_subcommand("sensitivity", "no-disruption probability sweep");
  std::string sens_scen, sens_eval, sens_dps = "0.0,0.05,0.2";
  double sens_eps = 1e-6;
  add_common(sens, c_sens);
  sens->add_option("--scenarios", sens_scen, "base scenario file")->required();
  sens->add_option("--eval-scenarios", sens_eval, "fixed test file");
  sens->add_option("--dp", sens_dps, "perturbations to sweep");
  sens->add_option("--epsilon", sens_eps, "solver gap per cell");

  auto* inter = app.add_subcommand("interact", "exogenous/endogenous interaction study");
  int inter_n = 50, inter_eval = 200;
  uint64_t inter_seed = 0;
  double inter_eps = 1e-6;
  add_common(inter, c_inter, true);
  inter->add_option("--n", inter_n, "training scenarios per set");
  inter->add_option("--eval-n", inter_eval, "test scenarios per set");
  inter->add_option("--seed", inter_seed, "random seed");
  inter->add_option("--epsilon", inter_eps, "solver gap");

  auto* plot = app.add_subcommand("plot", "emit SVG figures from artifacts");
  std::string plot_plan, plot_saa, plot_evals;
  int plot_period = 0;
  add_common(plot, c_plot);
  plot->add_option("--plan", plot_plan, "plan file for the network snapshot");
  plot->add_option("--period", plot_period, "snapshot period (default 2T/3)");
  plot->add_option("--saa", plot_saa, "SAA report for the confidence-interval plot");
  plot->add_option("--evals", plot_evals, "comma-separated evaluation reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(c_sim, sim_n, sim_seed, !sim_no_exo, !sim_no_endo);
    if (solve->parsed())
      return cmd_solve(c_solve, solve_scen, solve_eps, solve_delta, solve_cut,
                       solve_ext, solve_resume, solve_iters);
    if (eval->parsed())
      return cmd_evaluate(c_eval, eval_plan, eval_scen, eval_ref, eval_sizes, eval_reps,
                          eval_nsamples, eval_seed, eval_eps);
    if (bench->parsed())
      return cmd_benchmark(c_bench, bench_scen, bench_plan, bench_eval, bench_alphas);
    if (sens->parsed())
      return cmd_sensitivity(c_sens, sens_scen, sens_eval, sens_dps, sens_eps);
    if (inter->parsed())
      return cmd_interact(c_inter, inter_n, inter_eval, inter_seed, inter_eps);
    if (plot->parsed())
      return cmd_plot(c_plot, plot_plan, plot_period, plot_saa, plot_evals);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const OutOfRangeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const OutOfDomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
