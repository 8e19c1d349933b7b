#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gridfire/scenario.hpp"
#include "support/toys.hpp"

using namespace gridfire;

namespace {

GridGeometry unit_grid(int cols, int rows, double cell = 1.0) {
  GridGeometry g;
  g.cell_size = cell;
  g.n_cols = cols;
  g.n_rows = rows;
  return g;
}

// Case with a single line contained in one cell of a small grid: that cell's
// exogenous ignition probability is exactly 1.
struct SingleCellWorld {
  PowerCase pc;
  GridGeometry geom;
  CellMaps maps;

  explicit SingleCellWorld(int cols = 9, int rows = 9) {
    geom = unit_grid(cols, rows, 1000.0);
    geom.origin_e = 0.0;
    geom.origin_n = 0.0;
    pc.buses = {{"b1", 0, 0}, {"b2", 0, 0}};
    pc.generators = {{"g1", 0, 0, 50, FuelKind::Wind, 1.0}};
    pc.lines = {{"L1", 0, 1, 400, 50, 1.0, 5.0, 1.0, 0.0}};
    pc.loads = {{"d1", 1, 10, 100.0}};
    pc.horizon = 6;
    pc.finalize();
    const int seed_cell = geom.cell_of(cols / 2, rows / 2);
    maps.bus_cell = {seed_cell, seed_cell};
    maps.line_cells = {{seed_cell}};
    maps.cell_lines.assign(geom.cells(), {});
    maps.cell_lines[seed_cell] = {0};
    maps.cells_with_bus = {seed_cell};
    maps.cells_with_line = {seed_cell};
  }
  int seed_cell() const { return geom.cell_of(geom.n_cols / 2, geom.n_rows / 2); }
};

}  // namespace

TEST_CASE("spread probability follows the factor product with clamping") {
  GridGeometry g = unit_grid(2, 1);
  EnvLayers env = EnvLayers::uniform(g);
  SUBCASE("identity factors give q0") {
    CHECK(spread_prob(env, 1, 0) == doctest::Approx(0.58));
  }
  SUBCASE("zero reference kills spread") {
    env.q0[0] = 0.0;
    env.qveg[0] = 0.9;
    env.qden[0] = 0.9;
    env.qslope[0] = 4.0;
    CHECK(spread_prob(env, 1, 0) == 0.0);
  }
  SUBCASE("large factor product clamps to one") {
    env.q0[0] = 0.58;
    env.qveg[0] = 0.4;
    env.qden[0] = 0.3;
    env.qslope[0] = 1.2;
    env.wind.assign(1, {std::log(1.1) / EnvLayers::kWindC1, 0.0});
    // raw product 0.58 * 1.4 * 1.3 * 1.2 * 1.1 = 1.3933... -> clamped
    CHECK(env.wind_speed_factor(1) == doctest::Approx(1.1));
    CHECK(spread_prob(env, 1, 0) == doctest::Approx(1.0));
  }
  SUBCASE("unclamped product is exact") {
    env.q0[0] = 0.2;
    env.qveg[0] = 0.4;
    env.qden[0] = 0.3;
    env.qslope[0] = 1.2;
    env.wind.assign(1, {std::log(1.1) / EnvLayers::kWindC1, 0.0});
    CHECK(spread_prob(env, 1, 0) == doctest::Approx(0.2 * 1.4 * 1.3 * 1.2 * 1.1));
  }
  SUBCASE("downwind attempts are never amplified, upwind attempts are damped") {
    env.wind.assign(1, {8.0, 0.0});  // blowing toward +E
    CHECK(env.wind_direction_factor(1, 1, 0) == doctest::Approx(1.0));
    CHECK(env.wind_direction_factor(1, -1, 0) < 0.2);
  }
}

TEST_CASE("fault probability is 1 - exp(-rate)") {
  CHECK(fault_prob(0.0) == 0.0);
  CHECK(fault_prob(std::log(2.0)) == doctest::Approx(0.5));
  CHECK(fault_prob(0.001) == doctest::Approx(0.0009995001666250082).epsilon(1e-12));
}

TEST_CASE("ignition probability is the WFPI share of the cell") {
  // three buses on one row, lines with known corridors
  PowerCase pc;
  pc.buses = {{"b1", 0, 0}, {"b2", 0, 0}, {"b3", 0, 0}};
  pc.lines = {{"A", 0, 1, 400, 50, 1, 10.0, 1.0, 0.0},
              {"B", 1, 2, 400, 50, 1, 30.0, 1.0, 0.0},
              {"C", 0, 2, 400, 50, 1, 60.0, 1.0, 0.0}};
  pc.loads = {{"d", 0, 1, 100.0}};
  pc.horizon = 2;
  pc.finalize();
  GridGeometry g = unit_grid(3, 1, 1000.0);
  CellMaps maps;
  maps.bus_cell = {0, 1, 2};
  maps.line_cells = {{0, 1}, {1, 2}, {0, 1, 2}};
  maps.cell_lines = {{0, 2}, {0, 1, 2}, {1, 2}};
  maps.cells_with_bus = {0, 1, 2};
  maps.cells_with_line = {0, 1, 2};
  // hand-summed shares over total WFPI 100
  CHECK(ignition_prob(pc, maps, 0) == doctest::Approx(0.70));  // A + C
  CHECK(ignition_prob(pc, maps, 1) == doctest::Approx(1.00));  // all lines
  CHECK(ignition_prob(pc, maps, 2) == doctest::Approx(0.90));  // B + C

  SUBCASE("single line share") {
    maps.cell_lines[0] = {0};
    CHECK(ignition_prob(pc, maps, 0) == doctest::Approx(0.10));
  }
  SUBCASE("zero total WFPI is a validation error") {
    for (Line& l : pc.lines) l.wfpi = 0.0;
    CHECK_THROWS_AS(ignition_prob(pc, maps, 0), ValidationError);
  }
}

TEST_CASE("deterministic spread forms the Chebyshev ball") {
  SingleCellWorld world;
  EnvLayers env = EnvLayers::uniform(world.geom);
  for (double& q : env.q0) q = 1.0;  // certain spread
  RngStream rng{123, 0};
  ExoSimResult res = simulate_exogenous(world.pc, world.geom, world.maps, env, rng);
  CHECK(res.first_ignition == 1);  // that cell ignites with probability one
  const int c0 = world.geom.col_of(world.seed_cell());
  const int r0 = world.geom.row_of(world.seed_cell());
  for (int t = 1; t <= world.pc.horizon; ++t) {
    const int radius = std::max(t - 2, 0);
    for (int r = 0; r < world.geom.n_rows; ++r)
      for (int c = 0; c < world.geom.n_cols; ++c) {
        const int dist = std::max(std::abs(c - c0), std::abs(r - r0));
        const auto st = (CellState)res.states[t][world.geom.cell_of(c, r)];
        if (dist <= radius) {
          CHECK(st == CellState::Burning);
        } else if (dist == radius + 1 && t >= 2) {
          CHECK(st == CellState::Ignited);
        } else if (dist > radius + 1 || t == 1) {
          if (dist > 0) CHECK((st == CellState::Fuel || st == CellState::Ignited));
        }
      }
  }
}

TEST_CASE("zero spread keeps the fire in its seed cell") {
  SingleCellWorld world;
  EnvLayers env = EnvLayers::uniform(world.geom);
  for (double& q : env.q0) q = 0.0;
  RngStream rng{5, 0};
  ExoSimResult res = simulate_exogenous(world.pc, world.geom, world.maps, env, rng);
  for (int t = 0; t <= world.pc.horizon; ++t)
    for (int k = 0; k < world.geom.cells(); ++k) {
      if (k == world.seed_cell()) continue;
      CHECK((CellState)res.states[t][k] != CellState::Ignited);
      CHECK((CellState)res.states[t][k] != CellState::Burning);
    }
  // bus, its generator and the line all share the burning cell
  CHECK(res.damaged[0] == 1);
  CHECK(res.damaged[2] == 1);
  CHECK(res.damaged[3] == 1);
}

TEST_CASE("cell state transitions are monotone toward burning") {
  SingleCellWorld world;
  EnvLayers env = EnvLayers::uniform(world.geom);
  RngStream rng{42, 3};
  ExoSimResult res = simulate_exogenous(world.pc, world.geom, world.maps, env, rng);
  for (int t = 1; t <= world.pc.horizon; ++t)
    for (int k = 0; k < world.geom.cells(); ++k) {
      const auto prev = (CellState)res.states[t - 1][k];
      const auto cur = (CellState)res.states[t][k];
      if (prev == CellState::NoFuel) CHECK(cur == CellState::NoFuel);
      if (prev == CellState::Ignited) CHECK(cur == CellState::Burning);
      if (prev == CellState::Burning) CHECK(cur == CellState::Burning);
      if (prev == CellState::Fuel)
        CHECK((cur == CellState::Fuel || cur == CellState::Ignited));
    }
}

TEST_CASE("fault footprint reproduces the staged bus-fire illustration") {
  // bus i at (0,0); bus j1 at (0,2); bus j3 at (2,0); generator g1 at j1,
  // g2 at j3; fire spreads east only (fuel path along the bottom row)
  GridGeometry g = unit_grid(3, 3, 1000.0);
  PowerCase pc;
  pc.buses = {{"i", 0, 0}, {"j1", 0, 0}, {"j3", 0, 0}};
  pc.generators = {{"g1", 1, 0, 10, FuelKind::Wind, 1.0},
                   {"g2", 2, 0, 10, FuelKind::Wind, 1.0}};
  pc.lines = {{"i_j1", 0, 1, 400, 50, 1, 1.0, 1.0, 0.0},
              {"i_j3", 0, 2, 400, 50, 1, 1.0, 1.0, 0.0}};
  pc.loads = {{"d", 0, 1, 100.0}};
  pc.horizon = 4;
  pc.finalize();
  CellMaps maps;
  maps.bus_cell = {g.cell_of(0, 0), g.cell_of(0, 2), g.cell_of(2, 0)};
  maps.line_cells = {{g.cell_of(0, 0), g.cell_of(0, 1), g.cell_of(0, 2)},
                     {g.cell_of(0, 0), g.cell_of(1, 0), g.cell_of(2, 0)}};
  maps.cell_lines.assign(g.cells(), {});
  for (size_t l = 0; l < maps.line_cells.size(); ++l)
    for (int k : maps.line_cells[l]) maps.cell_lines[k].push_back((int)l);
  maps.cells_with_bus = {g.cell_of(0, 0), g.cell_of(2, 0), g.cell_of(0, 2)};
  std::sort(maps.cells_with_bus.begin(), maps.cells_with_bus.end());
  maps.cells_with_line = maps.line_cells[0];
  for (int k : maps.line_cells[1]) maps.cells_with_line.push_back(k);
  std::sort(maps.cells_with_line.begin(), maps.cells_with_line.end());
  maps.cells_with_line.erase(
      std::unique(maps.cells_with_line.begin(), maps.cells_with_line.end()),
      maps.cells_with_line.end());

  EnvLayers env = EnvLayers::uniform(g);
  for (double& q : env.q0) q = 1.0;
  env.fuel.assign(g.cells(), 0);
  env.fuel[g.cell_of(1, 0)] = 1;  // eastward corridor only
  env.fuel[g.cell_of(2, 0)] = 1;

  RngStream rng{9, 0};
  const int bus_i = 0;
  std::vector<int> I =
      compute_affected_set(pc, g, maps, env, rng, bus_i, /*fault_period=*/1);
  // affected: bus i, generator g2, both lines touching the burning cells,
  // and bus j3 -- but not j1 or g1
  std::vector<int> expect{0, 2, 4, 5, 6};  // i, j3, g2, i_j1, i_j3
  CHECK(I == expect);
}

TEST_CASE("endogenous faults honor the trivial edge cases") {
  SingleCellWorld world;
  EnvLayers env = EnvLayers::uniform(world.geom);
  SUBCASE("zero rates never fault") {
    RngStream rng{1, 0};
    EndoSimResult endo =
        simulate_endogenous(world.pc, world.geom, world.maps, env, rng);
    CHECK(endo.first_fault == world.pc.horizon + 1);
    for (uint8_t u : endo.fault) CHECK(u == 0);
  }
  SUBCASE("huge rate with zero spread gives the singleton footprint") {
    world.pc.lines[0].fault_rate = 50.0;  // fault probability ~ 1
    for (double& q : env.q0) q = 0.0;
    RngStream rng{1, 0};
    EndoSimResult endo =
        simulate_endogenous(world.pc, world.geom, world.maps, env, rng);
    const int lf = world.pc.flat_id({ComponentKind::Line, 0});
    CHECK(endo.fault[lf] == 1);
    CHECK(endo.fault_period[lf] == 1);
    // the line's own cell also holds both buses and the generator
    std::vector<int> expect{0, 1, 2, 3};
    CHECK(endo.affected[lf] == expect);
  }
}

TEST_CASE("affected sets ignore faults elsewhere (independent processes)") {
  PowerCase pc;
  pc.buses = {{"b1", 0, 0}, {"b2", 0, 0}, {"b3", 0, 0}};
  pc.lines = {{"A", 0, 1, 400, 50, 1, 1.0, 1.0, 3.0},
              {"B", 1, 2, 400, 50, 1, 1.0, 1.0, 3.0}};
  pc.loads = {{"d", 0, 1, 100.0}};
  pc.horizon = 4;
  pc.finalize();
  GridGeometry g = unit_grid(5, 1, 1000.0);
  CellMaps maps;
  maps.bus_cell = {0, 2, 4};
  maps.line_cells = {{0, 1, 2}, {2, 3, 4}};
  maps.cell_lines = {{0}, {0}, {0, 1}, {1}, {1}};
  maps.cells_with_bus = {0, 2, 4};
  maps.cells_with_line = {0, 1, 2, 3, 4};
  EnvLayers env = EnvLayers::uniform(g);

  RngStream rng{77, 5};
  EndoSimResult both = simulate_endogenous(pc, g, maps, env, rng);
  pc.lines[1].fault_rate = 0.0;  // mask line B
  EndoSimResult only_a = simulate_endogenous(pc, g, maps, env, rng);
  const int af = pc.flat_id({ComponentKind::Line, 0});
  CHECK(both.fault[af] == only_a.fault[af]);
  CHECK(both.fault_period[af] == only_a.fault_period[af]);
  CHECK(both.affected[af] == only_a.affected[af]);
}

TEST_CASE("generated scenarios are deterministic and internally consistent") {
  PowerCase pc = gridfire::testing::toy_three_bus();
  pc.default_fault_rate = 0.05;
  for (Line& l : pc.lines) l.fault_rate = 0.05;
  auto [geom, maps] = build_grid(pc, 1000.0);
  EnvLayers env = EnvLayers::uniform(geom);
  SimulationOptions opts;
  opts.count = 60;
  opts.seed = 2024;
  auto scen = generate_scenarios(pc, geom, maps, env, opts);
  REQUIRE((int)scen.size() == 60);
  double ptot = 0.0;
  for (const auto& sc : scen) {
    ptot += sc.probability;
    const bool disrupted = sc.disrupted(pc.horizon);
    bool any_u = false, any_v = false;
    for (uint8_t u : sc.fault) any_u |= u != 0;
    for (uint8_t v : sc.exo_damage) any_v |= v != 0;
    if (!disrupted) {
      CHECK(!any_u);
      CHECK(!any_v);
    } else {
      CHECK((any_u || any_v));
    }
    for (int c = 0; c < pc.component_count(); ++c) {
      if (sc.fault[c]) {
        const auto& I = sc.affected[c];
        CHECK(std::find(I.begin(), I.end(), c) != I.end());  // origin included
      } else {
        CHECK(sc.affected[c].empty());
      }
    }
  }
  CHECK(ptot == doctest::Approx(1.0));

  auto scen2 = generate_scenarios(pc, geom, maps, env, opts);
  ScenarioFile f1{case_fingerprint(pc), opts.seed, geom.cell_size, pc.horizon,
                  true,              true,      geom,           scen};
  ScenarioFile f2 = f1;
  f2.scenarios = scen2;
  write_scenarios("scen_a.jsonl", f1);
  write_scenarios("scen_b.jsonl", f2);
  std::ifstream a("scen_a.jsonl"), b("scen_b.jsonl");
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  ScenarioFile back = read_scenarios("scen_a.jsonl");
  REQUIRE(back.scenarios.size() == scen.size());
  for (size_t i = 0; i < scen.size(); ++i) {
    CHECK(back.scenarios[i].tau == scen[i].tau);
    CHECK(back.scenarios[i].probability == doctest::Approx(scen[i].probability));
  }
  std::remove("scen_a.jsonl");
  std::remove("scen_b.jsonl");
}

TEST_CASE("masked simulation yields exactly one quiet scenario") {
  PowerCase pc = gridfire::testing::toy_three_bus();
  auto [geom, maps] = build_grid(pc, 1000.0);
  EnvLayers env = EnvLayers::uniform(geom);
  SimulationOptions opts;
  opts.count = 1;
  opts.seed = 1;
  opts.exogenous = false;
  opts.endogenous = false;
  auto scen = generate_scenarios(pc, geom, maps, env, opts);
  REQUIRE(scen.size() == 1);
  CHECK(scen[0].tau == pc.horizon + 1);
  CHECK(!scen[0].disrupted(pc.horizon));
}

TEST_CASE("single-cell ignition frequency matches its probability") {
  SingleCellWorld world;
  EnvLayers env = EnvLayers::uniform(world.geom);
  for (double& q : env.q0) q = 0.0;  // isolate the ignition draw
  world.pc.horizon = 1;
  const int n = 4000;
  int hits = 0;
  for (int s = 0; s < n; ++s) {
    RngStream rng{99, (uint64_t)s};
    ExoSimResult res = simulate_exogenous(world.pc, world.geom, world.maps, env, rng);
    hits += res.first_ignition == 1;
  }
  // p = 1.0 here would be degenerate; use a fractional share instead
  world.pc.lines[0].wfpi = 3.0;
  PowerCase other = world.pc;  // add an off-grid line to dilute the share
  other.buses.push_back({"b3", 0, 0});
  other.lines.push_back({"L2", 0, 2, 400, 50, 1, 7.0, 1.0, 0.0});
  other.finalize();
  CellMaps maps = world.maps;
  maps.bus_cell.push_back(world.geom.cell_of(0, 0));
  maps.line_cells.push_back({world.geom.cell_of(0, 0)});
  maps.cell_lines[world.geom.cell_of(0, 0)].push_back(1);
  maps.cells_with_line.push_back(world.geom.cell_of(0, 0));
  std::sort(maps.cells_with_line.begin(), maps.cells_with_line.end());
  const double p = 0.3;
  int hits2 = 0;
  for (int s = 0; s < n; ++s) {
    RngStream rng{99, (uint64_t)s};
    ExoSimResult res = simulate_exogenous(other, world.geom, maps, env, rng);
    if (res.first_ignition == 1) {
      // only count the seed cell's draw
      const auto st = (CellState)res.states[1][world.seed_cell()];
      hits2 += st == CellState::Ignited;
    }
  }
  CHECK(hits == n);  // probability-one cell ignites in every run
  const double freq = (double)hits2 / n;
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(freq - p) < 3.0 * sigma);
}
