#include "gridfire/case.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace gridfire {

using nlohmann::json;

std::string to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Bus: return "bus";
    case ComponentKind::Generator: return "generator";
    case ComponentKind::Line: return "line";
  }
  return "?";
}

int PowerCase::flat_id(ComponentId c) const {
  switch (c.kind) {
    case ComponentKind::Bus: return c.index;
    case ComponentKind::Generator: return static_cast<int>(buses.size()) + c.index;
    case ComponentKind::Line:
      return static_cast<int>(buses.size() + generators.size()) + c.index;
  }
  return -1;
}

ComponentId PowerCase::component(int flat) const {
  const int nb = static_cast<int>(buses.size());
  const int ng = static_cast<int>(generators.size());
  if (flat < 0 || flat >= component_count())
    throw OutOfRangeError("component id " + std::to_string(flat) + " out of range");
  if (flat < nb) return {ComponentKind::Bus, flat};
  if (flat < nb + ng) return {ComponentKind::Generator, flat - nb};
  return {ComponentKind::Line, flat - nb - ng};
}

std::string PowerCase::component_label(int flat) const {
  ComponentId c = component(flat);
  switch (c.kind) {
    case ComponentKind::Bus: return buses[c.index].id;
    case ComponentKind::Generator: return generators[c.index].id;
    case ComponentKind::Line: return lines[c.index].id;
  }
  return "?";
}

bool PowerCase::is_peak(int period) const {
  return std::find(peak_periods.begin(), peak_periods.end(), period) != peak_periods.end();
}

void PowerCase::finalize() {
  const int nb = static_cast<int>(buses.size());
  if (nb == 0) throw ValidationError("case has no buses");
  if (horizon < 1) throw ValidationError("horizon must be >= 1");
  if (!(theta_min < 0.0 && 0.0 < theta_max))
    throw ValidationError("angle bounds must satisfy theta_min < 0 < theta_max");
  if (peak_factor <= 0.0) throw ValidationError("peak_factor must be positive");
  if (bus_damage_cost < 0.0) throw ValidationError("bus_damage_cost must be >= 0");
  if (default_fault_rate < 0.0) throw ValidationError("default fault rate must be >= 0");
  for (int t : peak_periods)
    if (t < 1 || t > horizon)
      throw ValidationError("peak period " + std::to_string(t) + " outside 1.." +
                            std::to_string(horizon));

  bus_generators.assign(nb, {});
  bus_loads.assign(nb, {});
  bus_lines_out.assign(nb, {});
  bus_lines_in.assign(nb, {});

  for (size_t g = 0; g < generators.size(); ++g) {
    const Generator& gen = generators[g];
    if (gen.bus < 0 || gen.bus >= nb)
      throw ValidationError("generator " + gen.id + ": bus " + std::to_string(gen.bus) +
                            " not found");
    if (gen.p_min > gen.p_max)
      throw ValidationError("generator " + gen.id + ": p_min > p_max");
    if (gen.damage_cost < 0.0)
      throw ValidationError("generator " + gen.id + ": damage cost unset (apply defaults)");
    bus_generators[gen.bus].push_back(static_cast<int>(g));
  }
  for (size_t l = 0; l < lines.size(); ++l) {
    const Line& ln = lines[l];
    if (ln.from_bus < 0 || ln.from_bus >= nb || ln.to_bus < 0 || ln.to_bus >= nb)
      throw ValidationError("line " + ln.id + ": endpoint bus not found");
    if (ln.thermal_limit <= 0.0)
      throw ValidationError("line " + ln.id + ": thermal limit must be > 0");
    if (ln.wfpi < 0.0) throw ValidationError("line " + ln.id + ": wfpi must be >= 0");
    if (ln.length_km < 0.0) throw ValidationError("line " + ln.id + ": length must be >= 0");
    if (ln.damage_cost < 0.0)
      throw ValidationError("line " + ln.id + ": damage cost unset (apply defaults)");
    if (ln.fault_rate < 0.0)
      throw ValidationError("line " + ln.id + ": fault rate unset (apply defaults)");
    bus_lines_out[ln.from_bus].push_back(static_cast<int>(l));
    bus_lines_in[ln.to_bus].push_back(static_cast<int>(l));
  }
  for (size_t d = 0; d < loads.size(); ++d) {
    const Load& ld = loads[d];
    if (ld.bus < 0 || ld.bus >= nb)
      throw ValidationError("load " + ld.id + ": bus " + std::to_string(ld.bus) +
                            " not found");
    if (ld.base_demand < 0.0)
      throw ValidationError("load " + ld.id + ": demand must be >= 0");
    if (!(ld.priority > 0.0))
      throw ValidationError("load " + ld.id + ": priority must be > 0");
    bus_loads[ld.bus].push_back(static_cast<int>(d));
  }
}

double demand(const PowerCase& pc, int load, int period) {
  if (period < 1 || period > pc.horizon)
    throw OutOfRangeError("period " + std::to_string(period) + " outside 1.." +
                          std::to_string(pc.horizon));
  if (load < 0 || load >= static_cast<int>(pc.loads.size()))
    throw OutOfRangeError("load index out of range");
  const double base = pc.loads[load].base_demand;
  return pc.is_peak(period) ? base * pc.peak_factor : base;
}

PowerCase default_cost_ratings(PowerCase pc) {
  for (Generator& g : pc.generators) {
    if (g.damage_cost < 0.0) {
      switch (g.fuel) {
        case FuelKind::Wind: g.damage_cost = 50.0; break;
        case FuelKind::Thermal: g.damage_cost = 1000.0; break;
        case FuelKind::Nuclear: g.damage_cost = 2500.0; break;
      }
    }
  }
  for (Line& l : pc.lines) {
    if (l.damage_cost < 0.0) l.damage_cost = 0.285 * l.length_km;
    if (l.fault_rate < 0.0) l.fault_rate = pc.default_fault_rate;
  }
  for (Load& d : pc.loads) {
    if (d.priority < 0.0) d.priority = 50.0;
    d.priority = std::clamp(d.priority, 50.0, 1000.0);
  }
  return pc;
}

double cost_upper_bound(const PowerCase& pc) {
  double shed = 0.0;
  for (const Load& d : pc.loads) shed += d.priority;
  double damage = static_cast<double>(pc.buses.size()) * pc.bus_damage_cost;
  for (const Generator& g : pc.generators) damage += std::max(g.damage_cost, 0.0);
  for (const Line& l : pc.lines) damage += std::max(l.damage_cost, 0.0);
  return shed * pc.horizon + damage;
}

namespace {

FuelKind fuel_from_string(const std::string& s) {
  if (s == "wind") return FuelKind::Wind;
  if (s == "thermal") return FuelKind::Thermal;
  if (s == "nuclear") return FuelKind::Nuclear;
  throw ParseError("unknown fuel kind: " + s);
}

std::string fuel_to_string(FuelKind k) {
  switch (k) {
    case FuelKind::Wind: return "wind";
    case FuelKind::Thermal: return "thermal";
    case FuelKind::Nuclear: return "nuclear";
  }
  return "?";
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ParseError(std::string("field ") + key + " must be numeric");
  return j.at(key).get<double>();
}

}  // namespace

PowerCase parse_case(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("case file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "gridfire-case/1")
    throw ParseError("missing or unsupported format tag (want gridfire-case/1)");

  PowerCase pc;
  try {
    const json& net = j.at("network");
    std::map<std::string, int> bus_index;
    for (const json& jb : net.at("buses")) {
      Bus b;
      b.id = jb.at("id").get<std::string>();
      b.latitude = get_num(jb, "latitude", 0.0);
      b.longitude = get_num(jb, "longitude", 0.0);
      if (bus_index.count(b.id)) throw ParseError("duplicate bus id " + b.id);
      bus_index[b.id] = static_cast<int>(pc.buses.size());
      pc.buses.push_back(b);
    }
    auto bus_of = [&](const json& item, const char* key, const std::string& who) {
      const std::string id = item.at(key).get<std::string>();
      auto it = bus_index.find(id);
      if (it == bus_index.end())
        throw ValidationError(who + ": bus " + id + " not found");
      return it->second;
    };
    if (net.contains("generators"))
      for (const json& jg : net.at("generators")) {
        Generator g;
        g.id = jg.at("id").get<std::string>();
        g.bus = bus_of(jg, "bus", "generator " + g.id);
        g.p_min = get_num(jg, "p_min", 0.0);
        g.p_max = get_num(jg, "p_max", 0.0);
        g.fuel = fuel_from_string(jg.value("fuel", "thermal"));
        g.damage_cost = get_num(jg, "damage_cost", -1.0);
        pc.generators.push_back(g);
      }
    if (net.contains("lines"))
      for (const json& jl : net.at("lines")) {
        Line l;
        l.id = jl.at("id").get<std::string>();
        l.from_bus = bus_of(jl, "from", "line " + l.id);
        l.to_bus = bus_of(jl, "to", "line " + l.id);
        l.susceptance = get_num(jl, "susceptance", 1.0);
        l.thermal_limit = get_num(jl, "thermal_limit", 0.0);
        l.length_km = get_num(jl, "length_km", 0.0);
        l.wfpi = get_num(jl, "wfpi", 0.0);
        l.damage_cost = get_num(jl, "damage_cost", -1.0);
        l.fault_rate = get_num(jl, "fault_rate", -1.0);
        pc.lines.push_back(l);
      }
    if (net.contains("loads"))
      for (const json& jd : net.at("loads")) {
        Load d;
        d.id = jd.at("id").get<std::string>();
        d.bus = bus_of(jd, "bus", "load " + d.id);
        d.base_demand = get_num(jd, "base_demand", 0.0);
        d.priority = get_num(jd, "priority", -1.0);
        pc.loads.push_back(d);
      }

    if (j.contains("costs")) {
      const json& jc = j.at("costs");
      pc.bus_damage_cost = get_num(jc, "bus_damage_cost", 50.0);
    }
    if (j.contains("environment")) {
      const json& je = j.at("environment");
      pc.default_fault_rate = get_num(je, "hourly_fault_rate", 0.0);
    }
    if (j.contains("demand")) {
      const json& jd = j.at("demand");
      pc.horizon = static_cast<int>(get_num(jd, "horizon", 24.0));
      pc.peak_factor = get_num(jd, "peak_factor", 1.2);
      if (jd.contains("peak_periods"))
        for (const json& t : jd.at("peak_periods")) pc.peak_periods.push_back(t.get<int>());
    }
    if (j.contains("angles")) {
      const json& ja = j.at("angles");
      pc.theta_min = get_num(ja, "min", pc.theta_min);
      pc.theta_max = get_num(ja, "max", pc.theta_max);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed case file: ") + e.what());
  }

  pc = default_cost_ratings(std::move(pc));
  pc.finalize();
  return pc;
}

std::string serialize_case(const PowerCase& pc) {
  json buses = json::array();
  for (const Bus& b : pc.buses)
    buses.push_back({{"id", b.id}, {"latitude", b.latitude}, {"longitude", b.longitude}});
  json gens = json::array();
  for (const Generator& g : pc.generators)
    gens.push_back({{"id", g.id},
                    {"bus", pc.buses[g.bus].id},
                    {"p_min", g.p_min},
                    {"p_max", g.p_max},
                    {"fuel", fuel_to_string(g.fuel)},
                    {"damage_cost", g.damage_cost}});
  json lines = json::array();
  for (const Line& l : pc.lines)
    lines.push_back({{"id", l.id},
                     {"from", pc.buses[l.from_bus].id},
                     {"to", pc.buses[l.to_bus].id},
                     {"susceptance", l.susceptance},
                     {"thermal_limit", l.thermal_limit},
                     {"length_km", l.length_km},
                     {"wfpi", l.wfpi},
                     {"damage_cost", l.damage_cost},
                     {"fault_rate", l.fault_rate}});
  json loads = json::array();
  for (const Load& d : pc.loads)
    loads.push_back({{"id", d.id},
                     {"bus", pc.buses[d.bus].id},
                     {"base_demand", d.base_demand},
                     {"priority", d.priority}});

  json j{{"format", "gridfire-case/1"},
         {"network",
          {{"buses", buses}, {"generators", gens}, {"lines", lines}, {"loads", loads}}},
         {"costs", {{"bus_damage_cost", pc.bus_damage_cost}}},
         {"environment", {{"hourly_fault_rate", pc.default_fault_rate}}},
         {"demand",
          {{"horizon", pc.horizon},
           {"peak_factor", pc.peak_factor},
           {"peak_periods", pc.peak_periods}}},
         {"angles", {{"min", pc.theta_min}, {"max", pc.theta_max}}}};
  return j.dump(2) + "\n";
}

PowerCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open case file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

void save_case(const PowerCase& pc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write case file: " + path);
  out << serialize_case(pc);
}

std::string case_fingerprint(const PowerCase& pc) {
  const std::string canon = serialize_case(pc);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gridfire
