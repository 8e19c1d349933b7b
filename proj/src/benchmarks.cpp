#include "gridfire/benchmarks.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace gridfire {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

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

void add_full_horizon_shed_objective(LinearModel& m, const PowerCase& pc,
                                     const FirstStageVars& fs) {
  for (int t = 1; t <= pc.horizon; ++t)
    for (size_t d = 0; d < pc.loads.size(); ++d) {
      m.add_objective_coefficient(fs.periods[t - 1].served[d], -pc.loads[d].priority);
      m.add_objective_offset(pc.loads[d].priority);
    }
}

}  // namespace

BenchmarkResult solve_deterministic(const PowerCase& pc, const BenchmarkOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  auto solver = make_solver(opts.solver);

  LinearModel m;
  FirstStageVars fs = add_first_stage(m, pc);
  add_full_horizon_shed_objective(m, pc, fs);
  SolveResult res = solver->solve(m, {opts.mip_gap, kInf});
  if (!res.has_solution()) throw SolverError("deterministic model did not solve");

  // prefer the all-on plan among ties so "no shut-off" holds deterministically
  LinearModel m1;
  FirstStageVars fs1 = add_first_stage(m1, pc);
  add_full_horizon_shed_objective(m1, pc, fs1);
  for (int c = 0; c < pc.component_count(); ++c)
    for (int t = 1; t <= pc.horizon; ++t) m1.fix_variable(fs1.z[c][t - 1], 1.0);
  SolveResult all_on = solver->solve(m1, {opts.mip_gap, kInf});

  BenchmarkResult out;
  out.tag = "det";
  if (all_on.has_solution() &&
      all_on.objective <= res.objective + 1e-9 * std::max(1.0, std::abs(res.objective))) {
    out.plan = extract_plan(pc, fs1, all_on.values);
    out.objective = all_on.objective;
  } else {
    out.plan = extract_plan(pc, fs, res.values);
    out.objective = res.objective;
  }
  out.solve_seconds = seconds_since(t0);
  return out;
}

WaitAndSeeResult solve_wait_and_see(const PowerCase& pc,
                                    const std::vector<DisruptionScenario>& scenarios,
                                    const BenchmarkOptions& opts) {
  if (scenarios.empty()) throw ValidationError("scenario set is empty");
  const auto t0 = std::chrono::steady_clock::now();
  const int T = pc.horizon;

  WaitAndSeeResult out;
  out.costs.assign(scenarios.size(), 0.0);

  // all non-disruptive scenarios share the deterministic optimum
  double det_cost = 0.0;
  bool need_det = false;
  for (const DisruptionScenario& sc : scenarios)
    if (!sc.disrupted(T)) need_det = true;
  if (need_det) det_cost = solve_deterministic(pc, opts).objective;

  parallel_over((int)scenarios.size(), opts.threads, [&](int w) {
    const DisruptionScenario& sc = scenarios[w];
    if (!sc.disrupted(T)) {
      out.costs[w] = det_cost;
      return;
    }
    thread_local std::unique_ptr<MilpSolver> solver;
    if (!solver) solver = make_solver(opts.solver);
    std::vector<DisruptionScenario> one{sc};
    one[0].probability = 1.0;
    ExtensiveModel em = build_extensive(pc, one, ObjectiveMode::Expectation);
    SolveResult res = solver->solve(em.model, {opts.mip_gap, kInf});
    if (!res.has_solution())
      throw SolverError("wait-and-see scenario " + std::to_string(w) + " did not solve");
    out.costs[w] = res.objective;
  });

  for (size_t w = 0; w < scenarios.size(); ++w)
    out.expected += scenarios[w].probability * out.costs[w];
  out.solve_seconds = seconds_since(t0);
  return out;
}

RiskTable compute_risk_table(const PowerCase& pc,
                             const std::vector<DisruptionScenario>& scenarios) {
  if (scenarios.empty()) throw ValidationError("scenario set is empty");
  RiskTable table;
  const int nc = pc.component_count();
  table.risk.assign(nc, 0.0);
  for (const DisruptionScenario& sc : scenarios)
    for (int c = 0; c < nc; ++c)
      if (sc.fault[c]) table.risk[c] += (double)sc.affected[c].size();
  for (double& r : table.risk) r /= (double)scenarios.size();
  for (double r : table.risk) table.risk_total += r * pc.horizon;
  for (int t = 1; t <= pc.horizon; ++t)
    for (size_t d = 0; d < pc.loads.size(); ++d) table.demand_total += demand(pc, (int)d, t);
  return table;
}

BenchmarkResult solve_risk_based(const PowerCase& pc, const RiskTable& risk,
                                 double alpha, const BenchmarkOptions& opts) {
  if (alpha < 0.0 || alpha > 1.0) throw ValidationError("alpha must lie in [0,1]");
  if (risk.risk_total <= 0.0 && alpha > 0.0)
    throw ValidationError("total risk is zero; the risk term is undefined");
  if (risk.demand_total <= 0.0 && alpha < 1.0)
    throw ValidationError("total demand is zero; the served term is undefined");
  const auto t0 = std::chrono::steady_clock::now();
  auto solver = make_solver(opts.solver);

  LinearModel m;
  FirstStageVars fs = add_first_stage(m, pc);
  for (int t = 1; t <= pc.horizon; ++t) {
    if (alpha > 0.0)
      for (int c = 0; c < pc.component_count(); ++c)
        if (risk.risk[c] != 0.0)
          m.add_objective_coefficient(fs.z[c][t - 1],
                                      alpha * risk.risk[c] / risk.risk_total);
    if (alpha < 1.0)
      for (size_t d = 0; d < pc.loads.size(); ++d) {
        const double D = demand(pc, (int)d, t);
        if (D != 0.0)
          m.add_objective_coefficient(
              fs.periods[t - 1].served[d],
              -(1.0 - alpha) * pc.loads[d].priority * D / risk.demand_total);
      }
  }
  SolveResult res = solver->solve(m, {opts.mip_gap, kInf});
  if (!res.has_solution()) throw SolverError("risk-based model did not solve");

  BenchmarkResult out;
  out.tag = "rb";
  out.plan = extract_plan(pc, fs, res.values);
  out.objective = res.objective;
  out.solve_seconds = seconds_since(t0);
  return out;
}

RobustResult solve_robust(const PowerCase& pc,
                          const std::vector<DisruptionScenario>& scenarios,
                          const BenchmarkOptions& opts, int max_rounds) {
  if (scenarios.empty()) throw ValidationError("scenario set is empty");
  const auto t0 = std::chrono::steady_clock::now();
  if (max_rounds <= 0) max_rounds = (int)scenarios.size();
  auto solver = make_solver(opts.solver);
  const SolveLimits eval_limits{1e-9, kInf};

  // seed: the scenario that is costliest even with perfect information
  WaitAndSeeResult ws = solve_wait_and_see(pc, scenarios, opts);
  int seed = 0;
  for (size_t w = 1; w < scenarios.size(); ++w)
    if (ws.costs[w] > ws.costs[seed]) seed = (int)w;

  RobustResult out;
  out.support = {seed};
  for (int round = 0; round < max_rounds; ++round) {
    out.iterations = round + 1;
    std::vector<DisruptionScenario> subset;
    for (int w : out.support) subset.push_back(scenarios[w]);
    ExtensiveModel em = build_extensive(pc, subset, ObjectiveMode::WorstCase);
    SolveResult res = solver->solve(em.model, {opts.mip_gap, kInf});
    if (!res.has_solution()) throw SolverError("robust epigraph model did not solve");
    out.plan = extract_plan(pc, em.first_stage, res.values);
    out.objective = res.objective;

    std::vector<double> costs(scenarios.size(), 0.0);
    parallel_over((int)scenarios.size(), opts.threads, [&](int w) {
      thread_local std::unique_ptr<MilpSolver> s;
      if (!s) s = make_solver(opts.solver);
      costs[w] = plan_scenario_cost(pc, out.plan, scenarios[w], *s, eval_limits).total();
    });
    int worst = 0;
    for (size_t w = 1; w < scenarios.size(); ++w)
      if (costs[w] > costs[worst]) worst = (int)w;
    out.worst_case = costs[worst];
    if (std::find(out.support.begin(), out.support.end(), worst) != out.support.end()) {
      out.converged = true;
      break;
    }
    out.support.push_back(worst);
  }
  std::sort(out.support.begin(), out.support.end());
  out.solve_seconds = seconds_since(t0);
  return out;
}

}  // namespace gridfire
