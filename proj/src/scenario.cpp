#include "gridfire/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace gridfire {

using nlohmann::json;

EnvLayers EnvLayers::uniform(const GridGeometry& geom) {
  EnvLayers env;
  const size_t n = static_cast<size_t>(geom.cells());
  env.q0.assign(n, kDefaultQ0);
  env.qveg.assign(n, 0.0);
  env.qden.assign(n, 0.0);
  env.qslope.assign(n, 1.0);
  env.fuel.assign(n, 1);
  return env;
}

double EnvLayers::wind_speed_factor(int period) const {
  if (wind.empty()) return 1.0;
  const size_t i = static_cast<size_t>(std::clamp(period - 1, 0, (int)wind.size() - 1));
  return std::exp(kWindC1 * wind[i].speed);
}

double EnvLayers::wind_direction_factor(int period, int dcol, int drow) const {
  if (wind.empty()) return 1.0;
  const size_t i = static_cast<size_t>(std::clamp(period - 1, 0, (int)wind.size() - 1));
  if (wind[i].speed <= 0.0) return 1.0;
  const double spread_dir = std::atan2((double)drow, (double)dcol);
  const double wind_dir = wind[i].direction_deg * 3.14159265358979323846 / 180.0;
  return std::exp(wind[i].speed * kWindC2 * (std::cos(spread_dir - wind_dir) - 1.0));
}

double spread_prob(const EnvLayers& env, int period, int cell) {
  const double q = env.q0[cell] * (1.0 + env.qveg[cell]) * (1.0 + env.qden[cell]) *
                   env.qslope[cell] * env.wind_speed_factor(period);
  return std::clamp(q, 0.0, 1.0);
}

double ignition_prob(const PowerCase& pc, const CellMaps& maps, int cell) {
  double total = 0.0;
  for (const Line& l : pc.lines) total += l.wfpi;
  if (total <= 0.0)
    throw ValidationError("total WFPI is zero; exogenous ignition probabilities undefined");
  double here = 0.0;
  for (int l : maps.cell_lines[cell]) here += pc.lines[l].wfpi;
  return here / total;
}

double fault_prob(double hourly_rate) { return 1.0 - std::exp(-hourly_rate); }

namespace {

// Damage footprint of a set of ever-on-fire cells.
std::vector<uint8_t> damage_from_fire(const PowerCase& pc, const CellMaps& maps,
                                      const std::vector<uint8_t>& ever_fire) {
  std::vector<uint8_t> damaged(pc.component_count(), 0);
  const int nb = static_cast<int>(pc.buses.size());
  for (int i = 0; i < nb; ++i) {
    if (ever_fire[maps.bus_cell[i]]) {
      damaged[i] = 1;
      for (int g : pc.bus_generators[i])
        damaged[pc.flat_id({ComponentKind::Generator, g})] = 1;
    }
  }
  for (size_t l = 0; l < pc.lines.size(); ++l) {
    for (int k : maps.line_cells[l]) {
      if (ever_fire[k]) {
        damaged[pc.flat_id({ComponentKind::Line, (int)l})] = 1;
        break;
      }
    }
  }
  return damaged;
}

void spread_step(const GridGeometry& geom, const EnvLayers& env, const RngStream& rng,
                 uint64_t tag, uint64_t key_a, int period, std::vector<uint8_t>& state,
                 std::vector<uint8_t>& ever_fire) {
  // Ignited cells turn fully burning first and already spread within the
  // same period: a seed ignited at t starts burning at t+1 and its first
  // ring ignites at t+1 as well.
  std::vector<uint8_t> burning = state;
  for (int k = 0; k < geom.cells(); ++k)
    if (state[k] == (uint8_t)CellState::Ignited)
      burning[k] = (uint8_t)CellState::Burning;
  std::vector<uint8_t> next = burning;
  const int cols = geom.n_cols, rows = geom.n_rows;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int k = geom.cell_of(c, r);
      if (burning[k] != (uint8_t)CellState::Fuel) continue;
      const double q = spread_prob(env, period, k);
      if (q <= 0.0) continue;
      for (int dr = -1; dr <= 1 && next[k] != (uint8_t)CellState::Ignited; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int c2 = c + dc, r2 = r + dr;
          if (c2 < 0 || c2 >= cols || r2 < 0 || r2 >= rows) continue;
          const int b = geom.cell_of(c2, r2);
          if (burning[b] != (uint8_t)CellState::Burning) continue;
          // attempt from b toward k; direction of spread is (-dc, -dr)
          const double attempt =
              std::clamp(q * env.wind_direction_factor(period, -dc, -dr), 0.0, 1.0);
          if (rng.uniform(tag, key_a, (uint64_t)k, (uint64_t)b) < attempt) {
            next[k] = (uint8_t)CellState::Ignited;
            ever_fire[k] = 1;
            break;
          }
        }
      }
    }
  }
  state.swap(next);
}

}  // namespace

ExoSimResult simulate_exogenous(const PowerCase& pc, const GridGeometry& geom,
                                const CellMaps& maps, const EnvLayers& env,
                                const RngStream& rng) {
  const int T = pc.horizon;
  const int ncells = geom.cells();

  // Exogenous ignition mass only exists in cells crossed by lines; other
  // cells (including bus-only cells) have p = 0 under the WFPI share rule.
  std::vector<double> ign(ncells, 0.0);
  for (int k : maps.cells_with_line) ign[k] = ignition_prob(pc, maps, k);

  ExoSimResult out;
  out.first_ignition = T + 1;
  std::vector<uint8_t> state(ncells);
  for (int k = 0; k < ncells; ++k)
    state[k] = env.fuel[k] ? (uint8_t)CellState::Fuel : (uint8_t)CellState::NoFuel;
  std::vector<uint8_t> ever_fire(ncells, 0);
  out.states.push_back(state);

  for (int t = 1; t <= T; ++t) {
    spread_step(geom, env, rng, RngStream::kExoSpread, (uint64_t)t, t, state, ever_fire);
    // Fresh exogenous ignitions land on cells still holding fuel.
    for (int k = 0; k < ncells; ++k) {
      if (state[k] != (uint8_t)CellState::Fuel || ign[k] <= 0.0) continue;
      if (rng.uniform(RngStream::kExoIgnite, (uint64_t)t, (uint64_t)k) < ign[k]) {
        state[k] = (uint8_t)CellState::Ignited;
        ever_fire[k] = 1;
        out.first_ignition = std::min(out.first_ignition, t);
      }
    }
    out.states.push_back(state);
  }
  out.damaged = damage_from_fire(pc, maps, ever_fire);
  return out;
}

std::vector<int> compute_affected_set(const PowerCase& pc, const GridGeometry& geom,
                                      const CellMaps& maps, const EnvLayers& env,
                                      const RngStream& rng, int origin, int fault_period) {
  const int T = pc.horizon;
  const int ncells = geom.cells();
  std::vector<uint8_t> state(ncells);
  for (int k = 0; k < ncells; ++k)
    state[k] = env.fuel[k] ? (uint8_t)CellState::Fuel : (uint8_t)CellState::NoFuel;
  std::vector<uint8_t> ever_fire(ncells, 0);

  ComponentId cid = pc.component(origin);
  std::vector<int> seeds;
  switch (cid.kind) {
    case ComponentKind::Bus: seeds = {maps.bus_cell[cid.index]}; break;
    case ComponentKind::Generator:
      seeds = {maps.bus_cell[pc.generators[cid.index].bus]};
      break;
    case ComponentKind::Line: seeds = maps.line_cells[cid.index]; break;
  }
  // The fault itself puts the component's cells on fire whether or not they
  // carry forest fuel.
  for (int k : seeds) {
    state[k] = (uint8_t)CellState::Ignited;
    ever_fire[k] = 1;
  }

  for (int t = fault_period + 1; t <= T; ++t) {
    const uint64_t key_a = (static_cast<uint64_t>(origin) << 32) | (uint64_t)t;
    spread_step(geom, env, rng, RngStream::kEndoSpread, key_a, t, state, ever_fire);
  }

  std::vector<uint8_t> damaged = damage_from_fire(pc, maps, ever_fire);
  damaged[origin] = 1;
  std::vector<int> out;
  for (int c = 0; c < (int)damaged.size(); ++c)
    if (damaged[c]) out.push_back(c);
  return out;
}

EndoSimResult simulate_endogenous(const PowerCase& pc, const GridGeometry& geom,
                                  const CellMaps& maps, const EnvLayers& env,
                                  const RngStream& rng) {
  const int T = pc.horizon;
  const int nc = pc.component_count();
  EndoSimResult out;
  out.fault.assign(nc, 0);
  out.fault_period.assign(nc, T + 1);
  out.affected.assign(nc, {});
  out.first_fault = T + 1;

  for (size_t l = 0; l < pc.lines.size(); ++l) {
    const double p = fault_prob(pc.lines[l].fault_rate);
    if (p <= 0.0) continue;
    const int flat = pc.flat_id({ComponentKind::Line, (int)l});
    for (int t = 1; t <= T; ++t) {
      if (rng.uniform(RngStream::kFault, (uint64_t)t, (uint64_t)l) < p) {
        out.fault[flat] = 1;
        out.fault_period[flat] = t;
        out.first_fault = std::min(out.first_fault, t);
        break;
      }
    }
  }
  for (int c = 0; c < nc; ++c) {
    if (!out.fault[c]) continue;
    out.affected[c] =
        compute_affected_set(pc, geom, maps, env, rng, c, out.fault_period[c]);
  }
  return out;
}

std::vector<DisruptionScenario> generate_scenarios(const PowerCase& pc,
                                                   const GridGeometry& geom,
                                                   const CellMaps& maps,
                                                   const EnvLayers& env,
                                                   const SimulationOptions& opts) {
  if (opts.count < 1) throw ValidationError("scenario count must be >= 1");
  const int T = pc.horizon;
  const int nc = pc.component_count();
  std::vector<DisruptionScenario> out(opts.count);

  auto simulate_one = [&](int s) {
    RngStream rng{opts.seed, (uint64_t)s};
    DisruptionScenario sc;
    sc.probability = 1.0 / static_cast<double>(opts.count);
    sc.exo_damage.assign(nc, 0);
    sc.fault.assign(nc, 0);
    sc.affected.assign(nc, {});
    int first_exo = T + 1, first_fault = T + 1;
    if (opts.exogenous) {
      ExoSimResult exo = simulate_exogenous(pc, geom, maps, env, rng);
      sc.exo_damage = std::move(exo.damaged);
      first_exo = exo.first_ignition;
    }
    if (opts.endogenous) {
      EndoSimResult endo = simulate_endogenous(pc, geom, maps, env, rng);
      sc.fault = std::move(endo.fault);
      sc.affected = std::move(endo.affected);
      first_fault = endo.first_fault;
    }
    sc.tau = std::min(first_exo, first_fault);
    if (sc.tau > T) {
      // no event anywhere: exogenous damage cannot exist either
      sc.exo_damage.assign(nc, 0);
    }
    out[s] = std::move(sc);
  };

  const int threads = std::max(1, opts.threads);
  if (threads == 1 || opts.count == 1) {
    for (int s = 0; s < opts.count; ++s) simulate_one(s);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (int s = next.fetch_add(1); s < opts.count; s = next.fetch_add(1))
          simulate_one(s);
      });
    for (auto& th : pool) th.join();
  }
  return out;
}

void write_scenarios(const std::string& path, const ScenarioFile& file) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file: " + path);
  json header{{"format", "gridfire-scenarios/1"},
              {"case_hash", file.case_hash},
              {"seed", file.seed},
              {"n", file.scenarios.size()},
              {"horizon", file.horizon},
              {"exogenous", file.exogenous},
              {"endogenous", file.endogenous},
              {"grid",
               {{"origin_e", file.grid.origin_e},
                {"origin_n", file.grid.origin_n},
                {"cell_size", file.grid.cell_size},
                {"n_cols", file.grid.n_cols},
                {"n_rows", file.grid.n_rows},
                {"zone", file.grid.zone},
                {"north", file.grid.north}}}};
  out << header.dump() << "\n";
  for (size_t i = 0; i < file.scenarios.size(); ++i) {
    const DisruptionScenario& sc = file.scenarios[i];
    json v = json::array(), u = json::array();
    json aff = json::object();
    for (size_t c = 0; c < sc.exo_damage.size(); ++c)
      if (sc.exo_damage[c]) v.push_back(c);
    for (size_t c = 0; c < sc.fault.size(); ++c)
      if (sc.fault[c]) {
        u.push_back(c);
        aff[std::to_string(c)] = sc.affected[c];
      }
    json rec{{"i", i}, {"tau", sc.tau}, {"p", sc.probability},
             {"v", v},  {"u", u},       {"I", aff}};
    out << rec.dump() << "\n";
  }
}

ScenarioFile read_scenarios(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("scenario file is empty");
  ScenarioFile file;
  try {
    json header = json::parse(line);
    if (header.value("format", "") != "gridfire-scenarios/1")
      throw ParseError("unsupported scenario file format");
    file.case_hash = header.value("case_hash", "");
    file.seed = header.value("seed", 0ull);
    file.horizon = header.value("horizon", 0);
    file.exogenous = header.value("exogenous", true);
    file.endogenous = header.value("endogenous", true);
    const json& g = header.at("grid");
    file.grid.origin_e = g.value("origin_e", 0.0);
    file.grid.origin_n = g.value("origin_n", 0.0);
    file.grid.cell_size = g.value("cell_size", 0.0);
    file.grid.n_cols = g.value("n_cols", 0);
    file.grid.n_rows = g.value("n_rows", 0);
    file.grid.zone = g.value("zone", 0);
    file.grid.north = g.value("north", true);
    file.cell_size = file.grid.cell_size;

    size_t expected = header.value("n", (size_t)0);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      DisruptionScenario sc;
      sc.tau = rec.at("tau").get<int>();
      sc.probability = rec.at("p").get<double>();
      // component count is not stored per record; infer lazily from max id
      int maxc = -1;
      for (const json& x : rec.at("v")) maxc = std::max(maxc, x.get<int>());
      for (const json& x : rec.at("u")) maxc = std::max(maxc, x.get<int>());
      for (auto it = rec.at("I").begin(); it != rec.at("I").end(); ++it)
        for (const json& x : it.value()) maxc = std::max(maxc, x.get<int>());
      sc.exo_damage.assign(maxc + 1, 0);
      sc.fault.assign(maxc + 1, 0);
      sc.affected.assign(maxc + 1, {});
      for (const json& x : rec.at("v")) sc.exo_damage[x.get<int>()] = 1;
      for (const json& x : rec.at("u")) sc.fault[x.get<int>()] = 1;
      for (auto it = rec.at("I").begin(); it != rec.at("I").end(); ++it) {
        const int c = std::stoi(it.key());
        sc.affected[c] = it.value().get<std::vector<int>>();
      }
      file.scenarios.push_back(std::move(sc));
    }
    if (expected && file.scenarios.size() != expected)
      throw ParseError("scenario file truncated: header n=" + std::to_string(expected) +
                       " but found " + std::to_string(file.scenarios.size()));
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed scenario file: ") + e.what());
  }
  return file;
}

EnvLayers load_env_csv(const std::string& path, const GridGeometry& geom) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open environment file: " + path);
  EnvLayers env = EnvLayers::uniform(geom);
  std::map<int, EnvLayers::Wind> wind_rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> f;
    while (std::getline(ss, tok, ',')) f.push_back(tok);
    if (f.empty()) continue;
    if (f[0] == "col") continue;  // header
    try {
      if (f[0] == "wind") {
        if (f.size() < 4) throw ParseError("wind row needs period,speed,direction");
        EnvLayers::Wind w;
        const int t = std::stoi(f[1]);
        w.speed = std::stod(f[2]);
        w.direction_deg = std::stod(f[3]);
        wind_rows[t] = w;
        continue;
      }
      if (f.size() < 7) throw ParseError("raster row needs col,row,q0,qveg,qden,qslope,fuel");
      const int col = std::stoi(f[0]), row = std::stoi(f[1]);
      if (col < 0 || col >= geom.n_cols || row < 0 || row >= geom.n_rows)
        throw ParseError("cell (" + f[0] + "," + f[1] + ") outside the grid");
      const int k = geom.cell_of(col, row);
      env.q0[k] = std::stod(f[2]);
      env.qveg[k] = std::stod(f[3]);
      env.qden[k] = std::stod(f[4]);
      env.qslope[k] = std::stod(f[5]);
      env.fuel[k] = std::stoi(f[6]) != 0;
      if (env.q0[k] < 0.0 || env.q0[k] > 1.0)
        throw ParseError("q0 must lie in [0,1]");
    } catch (const std::invalid_argument&) {
      throw ParseError("environment file line " + std::to_string(lineno) +
                       ": numeric field expected");
    }
  }
  if (!wind_rows.empty()) {
    const int maxt = wind_rows.rbegin()->first;
    env.wind.assign(maxt, {});
    for (auto& [t, w] : wind_rows) {
      if (t < 1) throw ParseError("wind period must be >= 1");
      env.wind[t - 1] = w;
    }
  }
  return env;
}

}  // namespace gridfire
