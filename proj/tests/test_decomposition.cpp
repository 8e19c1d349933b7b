#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gridfire/decomposition.hpp"
#include "support/toys.hpp"

using namespace gridfire;
using namespace gridfire::testing;

namespace {

std::unique_ptr<MilpSolver> solver() { return make_solver(SolverChoice::Auto); }

std::vector<uint8_t> bits(const PowerCase& pc, uint64_t mask) {
  std::vector<uint8_t> z(pc.component_count());
  for (int c = 0; c < pc.component_count(); ++c) z[c] = (mask >> c) & 1;
  return z;
}

}  // namespace

TEST_CASE("dual solve is tight at the anchor (strong duality on binaries)") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  auto s = solver();
  DispatchOracle dispatch(pc);
  SecondStageOracle oracle(pc, dispatch);
  for (int w : {1, 2, 4}) {
    for (uint64_t mask : {0x7full, 0x5bull, 0x00ull, 0x3aull}) {
      std::vector<uint8_t> z_hat = bits(pc, mask);
      const double f_hat = oracle.value(scen[w], mask);
      DualState state;
      DualResult dual = solve_dual(pc, scen[w], z_hat, f_hat, *s, state, 1e-7);
      CHECK(dual.converged);
      CHECK(dual.value == doctest::Approx(f_hat).epsilon(1e-4));
      CHECK(dual.value <= f_hat + 1e-6);  // weak duality
    }
  }
}

TEST_CASE("dual of a history-independent scenario is flat") {
  PowerCase pc = toy_three_bus();
  auto s = solver();
  // no faults and no exogenous damage: the second stage does not depend on
  // the inherited state beyond what it can re-choose, except y <= z
  DisruptionScenario benign = empty_scenario(pc, 3, 1.0);
  std::vector<uint8_t> z_on(pc.component_count(), 1);
  DispatchOracle dispatch(pc);
  SecondStageOracle oracle(pc, dispatch);
  const double f_hat = oracle.value(benign, mask_from(z_on));
  CHECK(f_hat == doctest::Approx(0.0));
  DualState state;
  DualResult dual = solve_dual(pc, benign, z_on, f_hat, *s, state, 1e-8);
  CHECK(dual.converged);
  CHECK(dual.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  for (double l : dual.lambda) CHECK(std::abs(l) < 1e-6);
}

TEST_CASE("dual linearizations overestimate R everywhere") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  auto s = solver();
  std::vector<uint8_t> z_hat(pc.component_count(), 1);
  DispatchOracle dispatch(pc);
  SecondStageOracle oracle(pc, dispatch);
  DualState state;
  const double f_hat = oracle.value(scen[2], mask_from(z_hat));
  solve_dual(pc, scen[2], z_hat, f_hat, *s, state, 1e-7);
  REQUIRE(state.linearizations.size() >= 1);
  RngStream rng{88, 0};
  for (int probe = 0; probe < 20; ++probe) {
    std::vector<double> lambda(pc.component_count());
    for (size_t c = 0; c < lambda.size(); ++c)
      lambda[c] = 400.0 * (rng.uniform(RngStream::kGeneric, probe, c) - 0.5);
    LagrangianOutcome lo = lagrangian_value(pc, scen[2], z_hat, lambda, *s, {1e-9, kInf});
    for (const DualLinearization& lin : state.linearizations) {
      double val = lin.intercept;
      for (size_t c = 0; c < lambda.size(); ++c) val += lin.gradient[c] * lambda[c];
      CHECK(val >= lo.value - 1e-6);
    }
  }
}

TEST_CASE("grid search cannot beat the bundle dual on a small component set") {
  // 1 bus, 1 gen, 1 line to a second bus: 3 linking components matter
  PowerCase pc = toy_two_bus();
  pc.horizon = 2;
  DisruptionScenario sc = empty_scenario(pc, 2, 1.0);
  const int L1 = pc.flat_id({ComponentKind::Line, 0});
  const int g1 = pc.flat_id({ComponentKind::Generator, 0});
  sc.fault[L1] = 1;
  sc.affected[L1] = {L1, g1};
  auto s = solver();
  std::vector<uint8_t> z_hat(pc.component_count(), 1);
  DispatchOracle dispatch(pc);
  SecondStageOracle oracle(pc, dispatch);
  const double f_hat = oracle.value(sc, mask_from(z_hat));
  DualState state;
  DualResult dual = solve_dual(pc, sc, z_hat, f_hat, *s, state, 1e-8);
  // coarse grid over the two components that can matter
  double best_grid = -kInf;
  const double U = cost_upper_bound(pc);
  for (double a : {-U, -U / 4, 0.0, U / 4, U})
    for (double b : {-U, -U / 4, 0.0, U / 4, U}) {
      std::vector<double> lambda(pc.component_count(), 0.0);
      lambda[L1] = a;
      lambda[g1] = b;
      best_grid = std::max(
          best_grid, lagrangian_value(pc, sc, z_hat, lambda, *s, {1e-9, kInf}).value);
    }
  CHECK(dual.value >= best_grid - 1e-6);
}

TEST_CASE("smc cut: zero target yields the flat zero cut") {
  PowerCase pc = toy_three_bus();
  auto s = solver();
  DisruptionScenario benign = empty_scenario(pc, 3, 1.0);
  std::vector<uint8_t> z_on(pc.component_count(), 1);
  DualState state;
  Cut cut = smc_cut(pc, benign, z_on, 1e-4, 0.0, *s, state, 0, 1);
  for (double l : cut.lambda) CHECK(l == doctest::Approx(0.0));
  CHECK(cut.value == doctest::Approx(0.0));
  CHECK(cut.kind == CutMode::SMC);
}

TEST_CASE("cut validity and tightness over every binary anchor") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  auto s = solver();
  DispatchOracle dispatch(pc);
  SecondStageOracle oracle(pc, dispatch);
  const int nc = pc.component_count();
  const double delta = 1e-4;

  for (int w : {2, 5}) {
    for (uint64_t anchor_mask : {0x7full, 0x2aull}) {
      std::vector<uint8_t> z_hat = bits(pc, anchor_mask);
      const double f_hat = oracle.value(scen[w], anchor_mask);

      DualState lc_state;
      DualResult dual = solve_dual(pc, scen[w], z_hat, f_hat, *s, lc_state, 1e-7);
      Cut lc;
      lc.lambda = dual.lambda;
      lc.value = dual.value;
      lc.anchor = z_hat;
      DualState smc_state;
      Cut smc = smc_cut(pc, scen[w], z_hat, delta, f_hat, *s, smc_state, w, 1, 1e-7);

      // anchor behavior
      CHECK(lc.evaluate(z_hat) == doctest::Approx(f_hat).epsilon(1e-4));
      CHECK(smc.evaluate(z_hat) >= (1.0 - delta) * f_hat - 1e-6);
      // the square-minimization gradient is never steeper than the plain one
      double nlc = 0.0, nsmc = 0.0;
      for (int c = 0; c < nc; ++c) {
        nlc += lc.lambda[c] * lc.lambda[c];
        nsmc += smc.lambda[c] * smc.lambda[c];
      }
      CHECK(nsmc <= nlc + 1e-6);
      // global validity at every binary state
      for (uint64_t mask = 0; mask < (1ull << nc); ++mask) {
        const double truth = oracle.value(scen[w], mask);
        std::vector<uint8_t> z = bits(pc, mask);
        CHECK(lc.evaluate(z) <= truth + 1e-6);
        CHECK(smc.evaluate(z) <= truth + 1e-6);
      }
    }
  }
}

TEST_CASE("master with no cuts prices recourse at zero") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  auto s = solver();
  MasterModel mm = build_master(pc, scen, {});
  SolveResult res = s->solve(mm.model, {1e-9, kInf});
  REQUIRE(res.status == SolveStatus::Optimal);
  // full service is feasible pre-disruption, so the empty master is zero
  CHECK(res.objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  for (size_t w = 0; w < scen.size(); ++w) {
    if (!scen[w].disrupted(pc.horizon)) {
      CHECK(mm.value_var[w] == -1);
    } else {
      CHECK(res.values[mm.value_var[w]] == doctest::Approx(0.0).scale(1.0));
    }
  }
}

TEST_CASE("scenarios sharing tau share the linking variables") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  // scenarios 2 and 5 both have tau = 3 in the handcrafted set
  CHECK(scen[3].tau == scen[5].tau);
  std::vector<Cut> pool;
  Cut a;
  a.scenario = 3;
  a.lambda.assign(pc.component_count(), 1.0);
  a.value = 1.0;
  a.anchor.assign(pc.component_count(), 1);
  Cut b = a;
  b.scenario = 5;
  pool.push_back(a);
  pool.push_back(b);
  MasterModel mm = build_master(pc, scen, pool);
  // both cut rows reference z[.][tau-2] columns; compare the variable ids
  const auto& rows = mm.model.constraints();
  const auto& r1 = rows[rows.size() - 2];
  const auto& r2 = rows[rows.size() - 1];
  std::vector<int> v1, v2;
  for (auto& [v, c] : r1.terms)
    if (c < 0) v1.push_back(v);
  for (auto& [v, c] : r2.terms)
    if (c < 0) v2.push_back(v);
  CHECK(v1 == v2);
}

TEST_CASE("master loaded with exact cuts reproduces the brute-force optimum") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  auto s = solver();
  DispatchOracle dispatch(pc);
  SecondStageOracle oracle(pc, dispatch);
  PlanEnumerator enumerator(pc, scen);
  OracleOptimum best = enumerator.optimum();

  // exact value function: one tight cut per binary anchor per scenario
  std::vector<Cut> pool;
  const int nc = pc.component_count();
  for (int w = 0; w < (int)scen.size(); ++w) {
    if (!scen[w].disrupted(pc.horizon)) continue;
    for (uint64_t mask = 0; mask < (1ull << nc); ++mask) {
      std::vector<uint8_t> z_hat = bits(pc, mask);
      const double f_hat = oracle.value(scen[w], mask);
      DualState state;
      DualResult dual = solve_dual(pc, scen[w], z_hat, f_hat, *s, state, 1e-7);
      Cut cut;
      cut.scenario = w;
      cut.lambda = dual.lambda;
      cut.value = dual.value;
      cut.anchor = z_hat;
      pool.push_back(cut);
    }
  }
  MasterModel mm = build_master(pc, scen, pool);
  SolveResult res = s->solve(mm.model, {1e-9, kInf});
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(best.objective).epsilon(1e-6));
}

TEST_CASE("decomposition at epsilon zero matches the enumeration in both modes") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  PlanEnumerator oracle(pc, scen);
  OracleOptimum best = oracle.optimum();
  for (CutMode mode : {CutMode::LC, CutMode::SMC}) {
    DecompositionOptions opts;
    opts.epsilon = 0.0;
    opts.mode = mode;
    DecompositionResult res = run_decomposition(pc, scen, opts);
    CHECK(res.converged);
    CHECK(res.upper == doctest::Approx(best.objective).epsilon(1e-6));
    CHECK(res.lower == doctest::Approx(best.objective).epsilon(1e-6));
    // bound sequences behave
    for (size_t i = 1; i < res.log.size(); ++i) {
      CHECK(res.log[i].lower >= res.log[i - 1].lower - 1e-9);
      CHECK(res.log[i].upper <= res.log[i - 1].upper + 1e-9);
    }
    CHECK(res.lower <= res.upper + 1e-9);
    // every pooled cut is globally valid
    DispatchOracle dispatch(pc);
    SecondStageOracle s2(pc, dispatch);
    for (const Cut& cut : res.pool) {
      for (uint64_t mask = 0; mask < (1ull << pc.component_count()); ++mask) {
        std::vector<uint8_t> z = bits(pc, mask);
        CHECK(cut.evaluate(z) <= s2.value(scen[cut.scenario], mask) + 1e-6);
      }
    }
  }
}

TEST_CASE("single quiet scenario converges immediately") {
  PowerCase pc = toy_three_bus();
  std::vector<DisruptionScenario> scen{empty_scenario(pc, pc.horizon + 1, 1.0)};
  DecompositionOptions opts;
  opts.epsilon = 0.0;
  DecompositionResult res = run_decomposition(pc, scen, opts);
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.upper == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("decomposition matches the extensive form on random toys") {
  auto s = solver();
  for (uint64_t seed : {11ull, 22ull, 33ull}) {
    PowerCase pc = random_toy(seed);
    auto scen = random_toy_scenarios(pc, seed * 7 + 1, 5);
    ExtensiveModel em = build_extensive(pc, scen, ObjectiveMode::Expectation);
    SolveResult ext = s->solve(em.model, {1e-9, kInf});
    REQUIRE(ext.status == SolveStatus::Optimal);
    DecompositionOptions opts;
    opts.epsilon = 0.0;
    opts.mode = CutMode::SMC;
    DecompositionResult res = run_decomposition(pc, scen, opts);
    CHECK(res.converged);
    CHECK(res.upper == doctest::Approx(ext.objective).epsilon(1e-6));
  }
}

TEST_CASE("checkpoints allow a clean resume") {
  PowerCase pc = toy_three_bus();
  auto scen = toy_three_bus_scenarios(pc);
  const std::string ckpt = "ckpt_test.json";
  DecompositionOptions opts;
  opts.epsilon = 0.0;
  opts.checkpoint_path = ckpt;
  opts.max_iterations = 2;  // stop early
  DecompositionResult partial = run_decomposition(pc, scen, opts);
  opts.max_iterations = 100;
  opts.resume = true;
  DecompositionResult resumed = run_decomposition(pc, scen, opts);
  std::remove(ckpt.c_str());
  CHECK(resumed.converged);
  PlanEnumerator oracle(pc, scen);
  CHECK(resumed.upper == doctest::Approx(oracle.optimum().objective).epsilon(1e-6));
  CHECK(resumed.log.front().iteration > partial.log.back().iteration - 1);
}

TEST_CASE("bounds CSV is written with one row per iteration") {
  std::vector<BoundsRecord> log{{1, 0.0, 10.0, "aa", 0.1}, {2, 5.0, 8.0, "bb", 0.2}};
  write_bounds_csv("bounds_test.csv", log);
  std::ifstream in("bounds_test.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  std::remove("bounds_test.csv");
  CHECK(rows == 3);  // header + 2
}
