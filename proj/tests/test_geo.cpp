#include "doctest.h"

#include <cmath>
#include <set>

#include "gridfire/geo.hpp"
#include "gridfire/rng.hpp"
#include "support/toys.hpp"

using namespace gridfire;

namespace {

// Independent meridian-arc series (classic e^2 expansion), used as the
// reference for northing along the central meridian.
double meridian_arc(double lat_deg) {
  const double a = 6378137.0, f = 1.0 / 298.257223563;
  const double e2 = f * (2.0 - f), e4 = e2 * e2, e6 = e4 * e2;
  const double phi = lat_deg * M_PI / 180.0;
  return a * ((1.0 - e2 / 4.0 - 3.0 * e4 / 64.0 - 5.0 * e6 / 256.0) * phi -
              (3.0 * e2 / 8.0 + 3.0 * e4 / 32.0 + 45.0 * e6 / 1024.0) * std::sin(2 * phi) +
              (15.0 * e4 / 256.0 + 45.0 * e6 / 1024.0) * std::sin(4 * phi) -
              (35.0 * e6 / 3072.0) * std::sin(6 * phi));
}

}  // namespace

TEST_CASE("projection identity at the equator / central meridian") {
  UtmPoint p = latlon_to_utm(0.0, -117.0, 11);  // zone 11 central meridian
  CHECK(p.easting == doctest::Approx(500000.0).epsilon(1e-9));
  CHECK(p.northing == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("northing matches the meridian arc on the central meridian") {
  for (double lat : {10.0, 34.0, 60.0}) {
    UtmPoint p = latlon_to_utm(lat, -117.0, 11);
    CHECK(p.easting == doctest::Approx(500000.0).epsilon(1e-9));
    CHECK(p.northing == doctest::Approx(0.9996 * meridian_arc(lat)).epsilon(1e-9));
  }
}

TEST_CASE("0.01 degree of latitude near 34N spans about 1105 m of northing") {
  UtmPoint a = latlon_to_utm(34.00, -117.3, 11);
  UtmPoint b = latlon_to_utm(34.01, -117.3, 11);
  const double dn = b.northing - a.northing;
  CHECK(dn >= 1100.0);
  CHECK(dn <= 1110.0);
}

TEST_CASE("southern california longitudes land in zone 11") {
  CHECK(utm_zone_for(-118.0) == 11);
  CHECK(utm_zone_for(-117.1) == 11);
  CHECK(latlon_to_utm(33.9, -116.5).zone == 11);
}

TEST_CASE("polar latitudes are out of the UTM domain") {
  CHECK_THROWS_AS(latlon_to_utm(86.0, 10.0), OutOfDomainError);
  CHECK_THROWS_AS(latlon_to_utm(-85.5, 10.0), OutOfDomainError);
}

TEST_CASE("projection round trip is far below 1e-6 degrees") {
  RngStream rng{7, 0};
  for (int i = 0; i < 200; ++i) {
    const double lat = -80.0 + 160.0 * rng.uniform(RngStream::kGeneric, i, 0);
    const double lon = -179.0 + 358.0 * rng.uniform(RngStream::kGeneric, i, 1);
    UtmPoint p = latlon_to_utm(lat, lon);
    auto [lat2, lon2] = utm_to_latlon(p);
    CHECK(std::abs(lat2 - lat) < 1e-6);
    CHECK(std::abs(lon2 - lon) < 1e-6);
  }
}

namespace {

GridGeometry unit_grid(int cols, int rows) {
  GridGeometry g;
  g.origin_e = 0.0;
  g.origin_n = 0.0;
  g.cell_size = 1.0;
  g.n_cols = cols;
  g.n_rows = rows;
  return g;
}

std::set<int> dense_sample_cells(const GridGeometry& g, double x0, double y0, double x1,
                                 double y1, double step = 0.01) {
  std::set<int> cells;
  const double len = std::hypot(x1 - x0, y1 - y0);
  const int n = std::max(2, (int)(len / step));
  for (int i = 0; i <= n; ++i) {
    const double t = (double)i / n;
    cells.insert(g.cell_at(x0 + t * (x1 - x0), y0 + t * (y1 - y0)));
  }
  return cells;
}

}  // namespace

TEST_CASE("supercover: degenerate segment stays in one cell") {
  GridGeometry g = unit_grid(4, 4);
  auto cells = supercover_cells(g, 1.2, 2.7, 1.9, 2.1);
  CHECK(cells == std::vector<int>{g.cell_of(1, 2)});
}

TEST_CASE("supercover: diagonal across a 3x3 block matches dense sampling") {
  GridGeometry g = unit_grid(3, 3);
  auto cells = supercover_cells(g, 0.4, 0.55, 2.6, 2.45);
  std::set<int> expect = dense_sample_cells(g, 0.4, 0.55, 2.6, 2.45);
  CHECK(std::set<int>(cells.begin(), cells.end()) == expect);
}

TEST_CASE("supercover contains every densely sampled cell") {
  GridGeometry g = unit_grid(12, 9);
  RngStream rng{11, 0};
  for (int i = 0; i < 60; ++i) {
    const double x0 = 12.0 * rng.uniform(RngStream::kGeneric, i, 0);
    const double y0 = 9.0 * rng.uniform(RngStream::kGeneric, i, 1);
    const double x1 = 12.0 * rng.uniform(RngStream::kGeneric, i, 2);
    const double y1 = 9.0 * rng.uniform(RngStream::kGeneric, i, 3);
    auto cover = supercover_cells(g, x0, y0, x1, y1);
    std::set<int> cover_set(cover.begin(), cover.end());
    for (int c : dense_sample_cells(g, x0, y0, x1, y1)) CHECK(cover_set.count(c) == 1);
  }
}

TEST_CASE("neighbors8 clips at the boundary") {
  GridGeometry g = unit_grid(5, 4);
  CHECK(neighbors8(g, g.cell_of(2, 2)).size() == 8);
  CHECK(neighbors8(g, g.cell_of(0, 0)).size() == 3);
  CHECK(neighbors8(g, g.cell_of(2, 0)).size() == 5);
  CHECK(neighbors8(g, g.cell_of(4, 3)).size() == 3);
  CHECK_THROWS_AS(neighbors8(g, 999), OutOfRangeError);
}

TEST_CASE("build_grid covers the paper-scale rectangle with the right cell counts") {
  // construct bus coordinates exactly 180 km x 138 km apart via the inverse
  // projection, then check the grid dimensions
  UtmPoint origin = latlon_to_utm(33.6, -117.8, 11);
  UtmPoint far = origin;
  far.easting += 180000.0;
  far.northing += 138000.0;
  auto [lat2, lon2] = utm_to_latlon(far);
  PowerCase pc;
  pc.buses = {{"sw", 33.6, -117.8}, {"ne", lat2, lon2}};
  pc.generators = {{"g", 0, 0, 10, FuelKind::Wind, 1.0}};
  pc.loads = {{"d", 1, 5, 100.0}};
  pc.horizon = 2;
  pc = default_cost_ratings(std::move(pc));
  pc.finalize();
  auto [geom, maps] = build_grid(pc, 1000.0);
  CHECK(geom.n_cols == 180);
  CHECK(geom.n_rows == 138);
  CHECK(geom.zone == 11);
  // the far bus sits on the outer corner and is clamped into the last cell
  CHECK(maps.bus_cell[1] == geom.cell_of(179, 137));
}

TEST_CASE("a bus on an interior shared edge belongs to the cell it corners") {
  UtmPoint origin = latlon_to_utm(33.6, -117.8, 11);
  auto mk = [&](double de, double dn) {
    UtmPoint p = origin;
    p.easting += de;
    p.northing += dn;
    auto [la, lo] = utm_to_latlon(p);
    return Bus{"b", la, lo};
  };
  PowerCase pc;
  pc.buses = {mk(0, 0), mk(1000.0, 500.0), mk(2500.0, 2500.0)};
  pc.buses[0].id = "b0";
  pc.buses[1].id = "b1";
  pc.buses[2].id = "b2";
  pc.loads = {{"d", 0, 1, 100.0}};
  pc.horizon = 1;
  pc = default_cost_ratings(std::move(pc));
  pc.finalize();
  auto [geom, maps] = build_grid(pc, 1000.0);
  // bus1 sits exactly on the vertical edge between columns 0 and 1
  CHECK(geom.col_of(maps.bus_cell[1]) == 1);
}

TEST_CASE("cell maps are bidirectionally consistent") {
  PowerCase pc = gridfire::testing::toy_three_bus();
  auto [geom, maps] = build_grid(pc, 1000.0);
  size_t lhs = 0, rhs = 0;
  for (const auto& ls : maps.cell_lines) lhs += ls.size();
  for (const auto& cs : maps.line_cells) rhs += cs.size();
  CHECK(lhs == rhs);
  for (size_t l = 0; l < maps.line_cells.size(); ++l)
    for (int k : maps.line_cells[l]) {
      const auto& lk = maps.cell_lines[k];
      CHECK(std::find(lk.begin(), lk.end(), (int)l) != lk.end());
    }
  for (int i = 0; i < (int)pc.buses.size(); ++i) {
    const auto& cb = maps.cells_with_bus;
    CHECK(std::find(cb.begin(), cb.end(), maps.bus_cell[i]) != cb.end());
  }
}
