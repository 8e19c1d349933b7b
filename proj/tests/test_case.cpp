#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "gridfire/case.hpp"
#include "support/toys.hpp"

using namespace gridfire;

namespace {

const char* kMinimalCase = R"({
  "format": "gridfire-case/1",
  "network": {
    "buses": [{"id": "b1", "latitude": 34.0, "longitude": -117.0}],
    "generators": [{"id": "g1", "bus": "b1", "p_min": 0, "p_max": 80, "fuel": "wind"}],
    "lines": [],
    "loads": [{"id": "d1", "bus": "b1", "base_demand": 40, "priority": 120}]
  },
  "demand": {"horizon": 4, "peak_factor": 1.2, "peak_periods": [3]}
})";

}  // namespace

TEST_CASE("minimal case parses and counts components") {
  PowerCase pc = parse_case(kMinimalCase);
  CHECK(pc.buses.size() == 1);
  CHECK(pc.generators.size() == 1);
  CHECK(pc.loads.size() == 1);
  // components are buses, generators and lines
  CHECK(pc.component_count() == 2);
  CHECK(pc.component(0).kind == ComponentKind::Bus);
  CHECK(pc.component(1).kind == ComponentKind::Generator);
  CHECK(pc.flat_id({ComponentKind::Generator, 0}) == 1);
  CHECK_THROWS_AS(pc.component(2), OutOfRangeError);
}

TEST_CASE("dangling bus reference is a validation error") {
  std::string text = kMinimalCase;
  auto pos = text.find("\"bus\": \"b1\", \"p_min\"");
  text.replace(pos, 12, "\"bus\": \"b99\",");
  CHECK_THROWS_WITH_AS(parse_case(text), "generator g1: bus b99 not found",
                       ValidationError);
}

TEST_CASE("malformed file is a parse error") {
  CHECK_THROWS_AS(parse_case("{ not json"), ParseError);
  CHECK_THROWS_AS(parse_case("{\"format\": \"nope\"}"), ParseError);
}

TEST_CASE("demand follows the peak profile") {
  PowerCase pc = parse_case(kMinimalCase);
  pc.loads[0].base_demand = 100.0;
  CHECK(demand(pc, 0, 3) == doctest::Approx(120.0));  // peak
  CHECK(demand(pc, 0, 2) == doctest::Approx(100.0));
  pc.loads[0].base_demand = 0.0;
  CHECK(demand(pc, 0, 1) == 0.0);
  CHECK(demand(pc, 0, 3) == 0.0);
  CHECK_THROWS_AS(demand(pc, 0, 0), OutOfRangeError);
  CHECK_THROWS_AS(demand(pc, 0, 5), OutOfRangeError);
}

TEST_CASE("demand is monotone in base demand and peak factor") {
  PowerCase pc = parse_case(kMinimalCase);
  double prev = -1.0;
  for (double base : {0.0, 10.0, 55.0, 200.0}) {
    pc.loads[0].base_demand = base;
    const double v = demand(pc, 0, 3);
    CHECK(v >= prev);
    prev = v;
  }
  pc.loads[0].base_demand = 70.0;
  prev = -1.0;
  for (double f : {1.0, 1.1, 1.35, 2.0}) {
    pc.peak_factor = f;
    const double v = demand(pc, 0, 3);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("default cost ratings") {
  PowerCase pc;
  pc.buses = {{"b1", 34.0, -117.0}, {"b2", 34.1, -116.9}};
  pc.generators = {{"gw", 0, 0, 10, FuelKind::Wind, -1.0},
                   {"gt", 0, 0, 10, FuelKind::Thermal, -1.0},
                   {"gn", 1, 0, 10, FuelKind::Nuclear, -1.0}};
  pc.lines = {{"L", 0, 1, 400, 50, 100.0, 1.0, -1.0, -1.0}};
  pc.loads = {{"d", 1, 5, 2000.0}, {"e", 0, 5, -1.0}};
  pc = default_cost_ratings(std::move(pc));
  CHECK(pc.generators[0].damage_cost == doctest::Approx(50.0));
  CHECK(pc.generators[1].damage_cost == doctest::Approx(1000.0));
  CHECK(pc.generators[2].damage_cost == doctest::Approx(2500.0));
  CHECK(pc.lines[0].damage_cost == doctest::Approx(28.5));  // 0.285 per km
  CHECK(pc.bus_damage_cost == doctest::Approx(50.0));
  CHECK(pc.loads[0].priority == doctest::Approx(1000.0));  // clamped
  CHECK(pc.loads[1].priority == doctest::Approx(50.0));    // defaulted
  // idempotent on explicit values
  PowerCase again = default_cost_ratings(pc);
  CHECK(again.generators[1].damage_cost == doctest::Approx(1000.0));
}

TEST_CASE("save/load round trip preserves every field") {
  PowerCase pc = gridfire::testing::toy_three_bus();
  const std::string path = "roundtrip_case.json";
  save_case(pc, path);
  PowerCase back = load_case(path);
  std::remove(path.c_str());
  CHECK(serialize_case(pc) == serialize_case(back));
  CHECK(case_fingerprint(pc) == case_fingerprint(back));
  CHECK(back.buses.size() == pc.buses.size());
  CHECK(back.lines[0].wfpi == doctest::Approx(pc.lines[0].wfpi));
  CHECK(back.peak_periods == pc.peak_periods);
  CHECK(back.theta_max == doctest::Approx(pc.theta_max));
}

TEST_CASE("component enumeration is stable and total") {
  PowerCase pc = gridfire::testing::toy_three_bus();
  const int nc = pc.component_count();
  CHECK(nc == (int)(pc.buses.size() + pc.generators.size() + pc.lines.size()));
  std::vector<std::string> labels;
  for (int c = 0; c < nc; ++c) {
    CHECK(pc.flat_id(pc.component(c)) == c);
    labels.push_back(pc.component_label(c));
  }
  std::sort(labels.begin(), labels.end());
  CHECK(std::adjacent_find(labels.begin(), labels.end()) == labels.end());
}

TEST_CASE("validation failures name the offending field") {
  PowerCase pc = gridfire::testing::toy_two_bus();
  pc.generators[0].p_min = 500.0;
  CHECK_THROWS_AS(pc.finalize(), ValidationError);
  pc = gridfire::testing::toy_two_bus();
  pc.lines[0].thermal_limit = 0.0;
  CHECK_THROWS_AS(pc.finalize(), ValidationError);
  pc = gridfire::testing::toy_two_bus();
  pc.theta_min = 0.5;
  CHECK_THROWS_AS(pc.finalize(), ValidationError);
  pc = gridfire::testing::toy_two_bus();
  pc.peak_periods = {99};
  CHECK_THROWS_AS(pc.finalize(), ValidationError);
}
