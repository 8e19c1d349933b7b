#pragma once

#include <string>
#include <vector>

#include "gridfire/types.hpp"

namespace gridfire {

enum class FuelKind : uint8_t { Wind = 0, Thermal = 1, Nuclear = 2 };

struct Bus {
  std::string id;
  double latitude = 0.0;
  double longitude = 0.0;
};

struct Generator {
  std::string id;
  int bus = -1;
  double p_min = 0.0;   // MW
  double p_max = 0.0;   // MW
  FuelKind fuel = FuelKind::Thermal;
  double damage_cost = -1.0;  // < 0 means "fill from defaults"
};

struct Line {
  std::string id;
  int from_bus = -1;
  int to_bus = -1;
  double susceptance = 1.0;     // per-unit, used as written: P = -b (th_i - th_j)
  double thermal_limit = 0.0;   // MW
  double length_km = 0.0;
  double wfpi = 0.0;            // relative ignition weight, >= 0
  double damage_cost = -1.0;    // < 0 means "fill from defaults"
  double fault_rate = -1.0;     // hourly rate; < 0 means "use case default"
};

struct Load {
  std::string id;
  int bus = -1;
  double base_demand = 0.0;  // MW
  double priority = -1.0;    // cost per fully-shed period; < 0 -> default
};

/// Immutable network description. Construct via load_case() or fill the
/// fields and call finalize(); after that treat it as read-only.
struct PowerCase {
  std::vector<Bus> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;
  std::vector<Load> loads;

  double bus_damage_cost = 50.0;
  double default_fault_rate = 0.0;  // hourly, uniform unless a line overrides

  int horizon = 24;
  std::vector<int> peak_periods;  // subset of 1..horizon
  double peak_factor = 1.2;

  double theta_min = -1.5707963267948966;  // big-M pair for angle differences
  double theta_max = 1.5707963267948966;

  // adjacency, built by finalize()
  std::vector<std::vector<int>> bus_generators;
  std::vector<std::vector<int>> bus_loads;
  std::vector<std::vector<int>> bus_lines_out;  // l = (i, .)
  std::vector<std::vector<int>> bus_lines_in;   // l = (., i)

  int component_count() const {
    return static_cast<int>(buses.size() + generators.size() + lines.size());
  }
  // Flat component order: buses, then generators, then lines.
  int flat_id(ComponentId c) const;
  ComponentId component(int flat) const;
  std::string component_label(int flat) const;

  bool is_peak(int period) const;

  /// Rebuilds adjacency and checks all structural invariants.
  /// Throws ValidationError naming the offending field.
  void finalize();
};

PowerCase load_case(const std::string& path);
void save_case(const PowerCase& pc, const std::string& path);
PowerCase parse_case(const std::string& text);
std::string serialize_case(const PowerCase& pc);

/// 64-bit FNV-1a over the canonical serialization, hex-encoded. Embedded in
/// artifact files so downstream commands can refuse mismatched inputs.
std::string case_fingerprint(const PowerCase& pc);

/// Demand of load d at period t (1-based). Peak periods are scaled by
/// peak_factor. Throws OutOfRangeError for t outside 1..horizon.
double demand(const PowerCase& pc, int load, int period);

/// Fills missing damage costs and priorities: wind 50, thermal 1000,
/// nuclear 2500, bus cost as given (default 50), line 0.285 * length;
/// load priorities defaulted to 50 and clamped to [50, 1000].
PowerCase default_cost_ratings(PowerCase pc);

/// Total cost scale of a case: one full horizon of shedding plus all
/// damage costs. Useful as a big-M / box bound in duals.
double cost_upper_bound(const PowerCase& pc);

}  // namespace gridfire
