#include "gridfire/evaluation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

namespace gridfire {

namespace {

template <typename Fn>
void parallel_over(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int nw = std::min(threads, n);
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

// two-sided 95% Student-t quantiles by degrees of freedom
double t975(int df) {
  static const double table[] = {0.0,    12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                 2.365,  2.306,  2.262, 2.228, 2.201, 2.179, 2.160,
                                 2.145,  2.131,  2.120, 2.110, 2.101, 2.093, 2.086,
                                 2.080,  2.074,  2.069, 2.064, 2.060, 2.056, 2.052,
                                 2.048,  2.045,  2.042};
  if (df <= 0) return 0.0;
  if (df <= 30) return table[df];
  return 1.96;
}

}  // namespace

ScenarioCost plan_scenario_cost(const PowerCase& pc, const ShutoffPlan& plan,
                                const DisruptionScenario& sc, MilpSolver& solver,
                                const SolveLimits& limits) {
  const int T = pc.horizon;
  ScenarioCost cost;
  const int cutoff = sc.disrupted(T) ? sc.tau - 1 : T;
  for (int t = 1; t <= cutoff; ++t) cost.pre_shed += plan.shed_cost(pc, t);
  if (!sc.disrupted(T)) return cost;
  SecondStageOutcome s2 =
      second_stage_value(pc, sc, plan.energized_at(sc.tau - 1), solver, limits);
  cost.post_shed = s2.shed_cost;
  cost.damage = s2.damage_cost;
  return cost;
}

EvaluationReport evaluate_plan(const PowerCase& pc, const ShutoffPlan& plan,
                               const std::vector<DisruptionScenario>& test_set,
                               const std::string& tag, const EvaluateOptions& opts) {
  if (test_set.empty()) throw ValidationError("evaluation test set is empty");
  validate_plan(pc, plan);
  EvaluationReport rep;
  rep.plan_tag = tag;
  rep.per_scenario.resize(test_set.size());
  const SolveLimits limits{opts.subproblem_gap, kInf};

  parallel_over((int)test_set.size(), opts.threads, [&](int i) {
    thread_local std::unique_ptr<MilpSolver> solver;
    if (!solver) solver = make_solver(opts.solver);
    rep.per_scenario[i] = plan_scenario_cost(pc, plan, test_set[i], *solver, limits);
  });

  const int T = pc.horizon;
  rep.worst_case = 0.0;
  for (size_t i = 0; i < test_set.size(); ++i) {
    const ScenarioCost& c = rep.per_scenario[i];
    const double p = test_set[i].probability;
    if (test_set[i].disrupted(T)) {
      rep.disruptive_shed += p * (c.pre_shed + c.post_shed);
      rep.disruptive_damage += p * c.damage;
    } else {
      rep.nondisruptive_shed += p * c.pre_shed;
    }
    rep.worst_case = std::max(rep.worst_case, c.total());
  }
  rep.g_n = rep.nondisruptive_shed + rep.disruptive_shed + rep.disruptive_damage;
  return rep;
}

double relative_improvement(const EvaluationReport& report, double reference_g_n) {
  if (reference_g_n == 0.0)
    throw ValidationError("RRI undefined: reference out-of-sample cost is zero");
  return (report.g_n - reference_g_n) / reference_g_n;
}

SaaStudy saa_study(const PowerCase& pc, const GridGeometry& geom, const CellMaps& maps,
                   const EnvLayers& env, const SaaOptions& opts) {
  if (opts.sizes.empty()) throw ValidationError("SAA study needs at least one size");
  if (opts.replicates < 2) throw ValidationError("SAA study needs >= 2 replicates");

  SimulationOptions eval_sim;
  eval_sim.count = opts.eval_count;
  eval_sim.seed = RngStream::mix(opts.seed ^ 0x5eedc0ffee);
  eval_sim.threads = opts.threads;
  const std::vector<DisruptionScenario> eval_set =
      generate_scenarios(pc, geom, maps, env, eval_sim);

  SaaStudy study;
  for (size_t si = 0; si < opts.sizes.size(); ++si) {
    const int size = opts.sizes[si];
    std::vector<double> lbs, ubs;
    for (int r = 0; r < opts.replicates; ++r) {
      SaaCell cell;
      cell.size = size;
      cell.replicate = r;
      try {
        SimulationOptions sim;
        sim.count = size;
        sim.seed = RngStream::mix(opts.seed ^ (0x100000 + 0x1000 * si + r));
        sim.threads = opts.threads;
        const auto scen = generate_scenarios(pc, geom, maps, env, sim);
        DecompositionOptions dopts = opts.solve;
        dopts.threads = opts.threads;
        DecompositionResult dres = run_decomposition(pc, scen, dopts);
        cell.lower = dres.upper;  // SAA optimum (exact at epsilon ~ 0)
        EvaluateOptions eopts;
        eopts.solver = opts.solve.solver;
        eopts.threads = opts.threads;
        EvaluationReport rep = evaluate_plan(pc, dres.incumbent, eval_set, "saa", eopts);
        cell.upper = rep.g_n;
        lbs.push_back(cell.lower);
        ubs.push_back(cell.upper);
      } catch (const std::exception&) {
        cell.failed = true;
      }
      study.cells.push_back(cell);
    }
    if (lbs.empty()) continue;
    SaaRow row;
    row.size = size;
    auto stats = [](const std::vector<double>& v, double& mean, double& half,
                    double& lo, double& hi) {
      mean = 0.0;
      for (double x : v) mean += x;
      mean /= (double)v.size();
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var = v.size() > 1 ? var / (double)(v.size() - 1) : 0.0;
      half = t975((int)v.size() - 1) * std::sqrt(var / (double)v.size());
      lo = *std::min_element(v.begin(), v.end());
      hi = *std::max_element(v.begin(), v.end());
    };
    stats(lbs, row.lb_mean, row.lb_half_width, row.lb_min, row.lb_max);
    stats(ubs, row.ub_mean, row.ub_half_width, row.ub_min, row.ub_max);
    study.rows.push_back(row);
  }
  return study;
}

std::vector<SensitivityRow> sensitivity_dp(const PowerCase& pc,
                                           const std::vector<DisruptionScenario>& base,
                                           const std::vector<double>& dps,
                                           const std::vector<DisruptionScenario>& test_set,
                                           const DecompositionOptions& solve_opts,
                                           const EvaluateOptions& eval_opts) {
  const int T = pc.horizon;
  std::vector<DisruptionScenario> disruptive;
  double p0 = 0.0;
  for (const DisruptionScenario& sc : base) {
    if (sc.disrupted(T))
      disruptive.push_back(sc);
    else
      p0 += sc.probability;
  }
  if (disruptive.empty())
    throw ValidationError("sensitivity study needs at least one disruptive scenario");

  DisruptionScenario omega0;  // merged no-disruption atom
  omega0.tau = T + 1;
  omega0.exo_damage.assign(pc.component_count(), 0);
  omega0.fault.assign(pc.component_count(), 0);
  omega0.affected.assign(pc.component_count(), {});

  auto reweighted = [&](double dp) {
    const double p0_new = p0 + dp;
    if (p0_new < -1e-12 || p0_new > 1.0 + 1e-12)
      throw ValidationError("dp = " + std::to_string(dp) +
                            " pushes the no-disruption probability outside [0,1]");
    std::vector<DisruptionScenario> out = disruptive;
    const double pd = (1.0 - p0_new) / (double)disruptive.size();
    if (pd < -1e-12)
      throw ValidationError("dp = " + std::to_string(dp) +
                            " leaves a negative disruptive probability");
    for (DisruptionScenario& sc : out) sc.probability = std::max(pd, 0.0);
    omega0.probability = std::clamp(p0_new, 0.0, 1.0);
    out.push_back(omega0);
    return out;
  };

  auto solve_and_eval = [&](double dp, SensitivityRow& row) {
    row.dp = dp;
    DecompositionResult dres = run_decomposition(pc, reweighted(dp), solve_opts);
    row.objective = dres.upper;
    EvaluationReport rep = evaluate_plan(pc, dres.incumbent, test_set, "dp", eval_opts);
    row.nondisruptive_shed = rep.nondisruptive_shed;
    row.disruptive_shed = rep.disruptive_shed;
    row.disruptive_damage = rep.disruptive_damage;
    row.g_n = rep.g_n;
    return rep.g_n;
  };

  SensitivityRow base_row;
  const double base_gn = solve_and_eval(0.0, base_row);

  std::vector<SensitivityRow> rows;
  for (double dp : dps) {
    if (dp == 0.0) {
      rows.push_back(base_row);
      rows.back().rri = 0.0;
      continue;
    }
    SensitivityRow row;
    solve_and_eval(dp, row);
    row.rri = base_gn != 0.0 ? (row.g_n - base_gn) / base_gn : 0.0;
    rows.push_back(row);
  }
  return rows;
}

const char* InteractionStudy::label(int i) {
  switch (i) {
    case 0: return "exo";
    case 1: return "mix";
    case 2: return "end";
  }
  return "?";
}

InteractionStudy interaction_study(const PowerCase& pc, const GridGeometry& geom,
                                   const CellMaps& maps, const EnvLayers& env,
                                   int train_count, int eval_count, uint64_t seed,
                                   const DecompositionOptions& solve_opts,
                                   const EvaluateOptions& eval_opts) {
  InteractionStudy study;
  std::array<std::vector<DisruptionScenario>, 3> train, tests;
  for (int kind = 0; kind < 3; ++kind) {
    SimulationOptions sim;
    sim.exogenous = kind != 2;
    sim.endogenous = kind != 0;
    sim.count = train_count;
    sim.seed = seed;
    train[kind] = generate_scenarios(pc, geom, maps, env, sim);
    sim.count = eval_count;
    sim.seed = RngStream::mix(seed ^ 0x7e57);
    tests[kind] = generate_scenarios(pc, geom, maps, env, sim);
  }
  for (int kind = 0; kind < 3; ++kind) {
    DecompositionResult dres = run_decomposition(pc, train[kind], solve_opts);
    study.plans[kind] = dres.incumbent;
  }
  for (int p = 0; p < 3; ++p)
    for (int s = 0; s < 3; ++s)
      study.reports[p][s] = evaluate_plan(
          pc, study.plans[p], tests[s],
          std::string(InteractionStudy::label(p)) + "/" + InteractionStudy::label(s),
          eval_opts);
  return study;
}

}  // namespace gridfire
