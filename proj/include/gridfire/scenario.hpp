#pragma once

#include <string>
#include <vector>

#include "gridfire/case.hpp"
#include "gridfire/geo.hpp"
#include "gridfire/rng.hpp"

namespace gridfire {

enum class CellState : uint8_t { NoFuel = 0, Fuel = 1, Ignited = 2, Burning = 3 };

/// Per-cell environment rasters plus the per-period wind table. All layers
/// default to the calm/uniform setting when a cell is not listed in the
/// raster file.
struct EnvLayers {
  std::vector<double> q0;      // reference spread probability
  std::vector<double> qveg;    // vegetation type modifier
  std::vector<double> qden;    // vegetation density modifier
  std::vector<double> qslope;  // slope factor
  std::vector<uint8_t> fuel;   // 1 if the cell carries burnable fuel

  struct Wind {
    double speed = 0.0;          // m/s
    double direction_deg = 0.0;  // direction the wind blows toward, CCW from +E
  };
  std::vector<Wind> wind;  // indexed by period-1; empty means calm horizon

  static constexpr double kDefaultQ0 = 0.58;
  static constexpr double kWindC1 = 0.045;
  static constexpr double kWindC2 = 0.131;

  static EnvLayers uniform(const GridGeometry& geom);

  double wind_speed_factor(int period) const;
  /// Directional multiplier (<= 1) for spread toward (dcol, drow).
  double wind_direction_factor(int period, int dcol, int drow) const;
};

/// q = q0 (1 + qveg)(1 + qden) qs qw, clamped to [0, 1]. The wind factor
/// here is the speed part; the directional part is applied per spread
/// attempt by the simulator.
double spread_prob(const EnvLayers& env, int period, int cell);

/// p_tk = sum of WFPI over lines in the cell / total WFPI. Time-invariant.
/// Throws ValidationError when the network's total WFPI is zero.
double ignition_prob(const PowerCase& pc, const CellMaps& maps, int cell);

/// 1 - exp(-rate); buses and generators never fault (rate 0 upstream).
double fault_prob(double hourly_rate);

/// One sampled disruption realization. tau == horizon + 1 encodes "no
/// disruption". Component vectors are indexed by flat component id.
struct DisruptionScenario {
  int tau = 0;
  std::vector<uint8_t> exo_damage;           // v_c
  std::vector<uint8_t> fault;                // u_c
  std::vector<std::vector<int>> affected;    // I_c, empty unless fault[c]
  double probability = 0.0;

  bool disrupted(int horizon) const { return tau <= horizon; }
};

struct ExoSimResult {
  std::vector<std::vector<uint8_t>> states;  // per period 0..T, CellState values
  std::vector<uint8_t> damaged;              // v_c per flat component
  int first_ignition = 0;                    // T+1 if none
};

struct EndoSimResult {
  std::vector<uint8_t> fault;               // u_c
  std::vector<int> fault_period;            // per flat id, T+1 if none
  std::vector<std::vector<int>> affected;   // I_c
  int first_fault = 0;                      // T+1 if none
};

ExoSimResult simulate_exogenous(const PowerCase& pc, const GridGeometry& geom,
                                const CellMaps& maps, const EnvLayers& env,
                                const RngStream& rng);

EndoSimResult simulate_endogenous(const PowerCase& pc, const GridGeometry& geom,
                                  const CellMaps& maps, const EnvLayers& env,
                                  const RngStream& rng);

/// Fire footprint of a fault at `origin` (flat id) igniting at
/// `fault_period`: an independent automaton seeded with the component's
/// cells, spread only. Returns the affected component set (origin included).
std::vector<int> compute_affected_set(const PowerCase& pc, const GridGeometry& geom,
                                      const CellMaps& maps, const EnvLayers& env,
                                      const RngStream& rng, int origin, int fault_period);

struct SimulationOptions {
  int count = 1;
  uint64_t seed = 0;
  bool exogenous = true;   // false forces p_tk = 0 (endo-only studies)
  bool endogenous = true;  // false forces fault rates to 0 (exo-only studies)
  int threads = 1;
};

std::vector<DisruptionScenario> generate_scenarios(const PowerCase& pc,
                                                   const GridGeometry& geom,
                                                   const CellMaps& maps,
                                                   const EnvLayers& env,
                                                   const SimulationOptions& opts);

/// Scenario file: one JSON header line, then one JSON record per scenario.
struct ScenarioFile {
  std::string case_hash;
  uint64_t seed = 0;
  double cell_size = 0.0;
  int horizon = 0;
  bool exogenous = true;
  bool endogenous = true;
  GridGeometry grid;
  std::vector<DisruptionScenario> scenarios;
};

void write_scenarios(const std::string& path, const ScenarioFile& file);
ScenarioFile read_scenarios(const std::string& path);

/// Environment raster CSV: columns col,row,q0,qveg,qden,qslope,fuel with an
/// optional wind table `wind,period,speed,direction`. Missing cells keep the
/// uniform defaults.
EnvLayers load_env_csv(const std::string& path, const GridGeometry& geom);

}  // namespace gridfire
