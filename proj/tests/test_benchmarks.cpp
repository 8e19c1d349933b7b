#include "doctest.h"

#include <cmath>

#include "gridfire/benchmarks.hpp"
#include "gridfire/decomposition.hpp"
#include "support/toys.hpp"

using namespace gridfire;
using namespace gridfire::testing;

TEST_CASE("deterministic model keeps everything on when full service is free") {
  PowerCase pc = toy_three_bus();
  BenchmarkResult det = solve_deterministic(pc);
  CHECK(det.objective == doctest::Approx(0.0).scale(1.0));
  for (int t = 1; t <= pc.horizon; ++t) CHECK(det.plan.off_count(t) == 0);
}

TEST_CASE("islanded load with no generation sheds exactly its priority") {
  PowerCase pc = toy_two_bus();
  // remove the only path to the load
  pc.lines[0].thermal_limit = 1e-3;
  pc.lines.clear();
  pc.finalize();
  BenchmarkResult det = solve_deterministic(pc);
  CHECK(det.objective ==
        doctest::Approx(pc.horizon * pc.loads[0].priority).epsilon(1e-9));
}

TEST_CASE("congested line sheds the cheap remainder") {
  PowerCase pc = toy_two_bus();
  pc.lines[0].thermal_limit = 30.0;  // demand is 50
  pc.finalize();
  BenchmarkResult det = solve_deterministic(pc);
  // shed fraction 20/50 of a 100-priority load for two periods
  CHECK(det.objective == doctest::Approx(2 * 100.0 * 20.0 / 50.0));
}

TEST_CASE("wait-and-see bounds every nominal plan from below") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  WaitAndSeeResult ws = solve_wait_and_see(pc, scen);
  // quiet scenario costs the deterministic optimum
  CHECK(ws.costs[0] == doctest::Approx(0.0).scale(1.0));
  // exogenous damage r = 2.85 on L2 is a hard floor for its scenario
  CHECK(ws.costs[1] >= pc.lines[1].damage_cost - 1e-9);

  DecompositionOptions opts;
  opts.epsilon = 0.0;
  DecompositionResult smip = run_decomposition(pc, scen, opts);
  EvaluationReport det_eval =
      evaluate_plan(pc, solve_deterministic(pc).plan, scen, "det");
  CHECK(ws.expected <= smip.upper + 1e-6);
  CHECK(smip.upper <= det_eval.g_n + 1e-6);
}

TEST_CASE("risk table averages the fault footprints") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  RiskTable table = compute_risk_table(pc, scen);
  const int L1 = flat(pc, ComponentKind::Line, 0);
  const int L2 = flat(pc, ComponentKind::Line, 1);
  // L1 faults in 3 of 6 scenarios with |I| = 3; L2 in 1 of 6 with |I| = 3
  CHECK(table.risk[L1] == doctest::Approx(3.0 * 3.0 / 6.0));
  CHECK(table.risk[L2] == doctest::Approx(3.0 / 6.0));
  CHECK(table.risk[flat(pc, ComponentKind::Bus, 1)] == 0.0);
  // normalizers
  double rt = 0.0;
  for (double r : table.risk) rt += r * pc.horizon;
  CHECK(table.risk_total == doctest::Approx(rt));
  double dt = 0.0;
  for (int t = 1; t <= pc.horizon; ++t)
    for (size_t d = 0; d < pc.loads.size(); ++d) dt += demand(pc, (int)d, t);
  CHECK(table.demand_total == doctest::Approx(dt));
}

TEST_CASE("component never faulting carries zero risk") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  RiskTable table = compute_risk_table(pc, scen);
  CHECK(table.risk[flat(pc, ComponentKind::Generator, 0)] == 0.0);
  // 1 fault among 4 scenarios with footprint 5 averages to 1.25
  std::vector<DisruptionScenario> four(4, empty_scenario(pc, 2, 0.25));
  four[1].fault[0] = 1;
  four[1].affected[0] = {0, 1, 2, 3, 4};
  RiskTable t2 = compute_risk_table(pc, four);
  CHECK(t2.risk[0] == doctest::Approx(1.25));
}

TEST_CASE("risk-based extremes: alpha 0 serves, alpha 1 shuts the risky set") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  RiskTable table = compute_risk_table(pc, scen);

  BenchmarkResult a0 = solve_risk_based(pc, table, 0.0);
  // pure load maximization keeps full service: deterministic-objective value 0
  double shed = 0.0;
  for (int t = 1; t <= pc.horizon; ++t) shed += a0.plan.shed_cost(pc, t);
  BenchmarkResult det = solve_deterministic(pc);
  CHECK(shed == doctest::Approx(det.objective).scale(1.0).epsilon(1e-7));

  BenchmarkResult a1 = solve_risk_based(pc, table, 1.0);
  // every component with positive risk is de-energized from t = 1
  const int L1 = flat(pc, ComponentKind::Line, 0);
  const int L2 = flat(pc, ComponentKind::Line, 1);
  for (int t = 1; t <= pc.horizon; ++t) {
    CHECK(a1.plan.z[L1][t] == 0);
    CHECK(a1.plan.z[L2][t] == 0);
  }
  // minimal risk among feasible plans: no energized risky component remains
  double residual = 0.0;
  for (int c = 0; c < pc.component_count(); ++c)
    for (int t = 1; t <= pc.horizon; ++t)
      if (a1.plan.z[c][t]) residual += table.risk[c];
  CHECK(residual == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("risk-based model on a toy matches exhaustive verification") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  RiskTable table = compute_risk_table(pc, scen);
  const double alpha = 0.5;
  BenchmarkResult rb = solve_risk_based(pc, table, alpha);

  // exhaustive: enumerate monotone schedules, price served load per period
  DispatchOracle dispatch(pc);
  const int nc = pc.component_count();
  const int T = pc.horizon;
  const int nb = (int)pc.buses.size();
  const int ng = (int)pc.generators.size();
  double best = kInf;
  std::vector<int> shutoff(nc);
  const long total = (long)std::pow((double)(T + 1), nc);
  for (long code = 0; code < total; ++code) {
    long rem = code;
    bool ok = true;
    for (int c = 0; c < nc; ++c) {
      shutoff[c] = (int)(rem % (T + 1)) + 1;
      rem /= (T + 1);
    }
    for (int g = 0; g < ng && ok; ++g)
      if (shutoff[nb + g] > shutoff[pc.generators[g].bus]) ok = false;
    for (size_t l = 0; l < pc.lines.size() && ok; ++l)
      if (shutoff[nb + ng + (int)l] > std::min(shutoff[pc.lines[l].from_bus],
                                               shutoff[pc.lines[l].to_bus]))
        ok = false;
    if (!ok) continue;
    double value = 0.0;
    for (int t = 1; t <= T; ++t) {
      uint64_t mask = 0;
      double risk_t = 0.0;
      for (int c = 0; c < nc; ++c)
        if (t < shutoff[c]) {
          mask |= 1ull << c;
          risk_t += table.risk[c];
        }
      // served-value LP: the shed LP returns sum w (1-x); convert using the
      // weighted-demand objective of the risk model
      // here we re-derive the served term exactly by a dedicated LP
      value += alpha * risk_t / table.risk_total;
      value -= (1.0 - alpha) * dispatch_served_value(pc, dispatch, mask, t) /
               table.demand_total;
    }
    best = std::min(best, value);
  }
  CHECK(rb.objective == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("robust plan optimizes the in-sample worst case") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  RobustResult ro = solve_robust(pc, scen);
  CHECK(ro.converged);
  CHECK((int)ro.support.size() < (int)scen.size());
  // termination certificate: verified worst case equals the epigraph value
  CHECK(ro.worst_case == doctest::Approx(ro.objective).epsilon(1e-6));

  DecompositionOptions opts;
  opts.epsilon = 0.0;
  DecompositionResult smip = run_decomposition(pc, scen, opts);
  EvaluationReport smip_eval = evaluate_plan(pc, smip.incumbent, scen, "star");
  EvaluationReport det_eval =
      evaluate_plan(pc, solve_deterministic(pc).plan, scen, "det");
  CHECK(ro.worst_case <= smip_eval.worst_case + 1e-6);
  CHECK(ro.worst_case <= det_eval.worst_case + 1e-6);
}

TEST_CASE("robust on a single scenario is wait-and-see") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  std::vector<DisruptionScenario> one{scen[3]};
  one[0].probability = 1.0;
  RobustResult ro = solve_robust(pc, one);
  WaitAndSeeResult ws = solve_wait_and_see(pc, one);
  CHECK(ro.objective == doctest::Approx(ws.costs[0]).epsilon(1e-6));
}

TEST_CASE("risk-based guards divide-by-zero") {
  PowerCase pc = toy_three_bus();
  std::vector<DisruptionScenario> quiet{empty_scenario(pc, pc.horizon + 1, 1.0)};
  RiskTable table = compute_risk_table(pc, quiet);
  CHECK(table.risk_total == 0.0);
  CHECK_THROWS_AS(solve_risk_based(pc, table, 0.5), ValidationError);
  CHECK_NOTHROW(solve_risk_based(pc, table, 0.0));
}
