#pragma once

#include <utility>
#include <vector>

#include "gridfire/case.hpp"

namespace gridfire {

struct UtmPoint {
  double easting = 0.0;   // meters
  double northing = 0.0;  // meters
  int zone = 0;           // 1..60
  bool north = true;
};

/// UTM zone of a longitude (degrees), floor(lon/6) + 31, clamped to 1..60.
int utm_zone_for(double lon_deg);

/// WGS84 transverse-Mercator projection (k0 = 0.9996, 500 km false easting).
/// zone == 0 picks the zone of the point itself. Latitudes beyond +-84 deg
/// are outside the domain and throw OutOfDomainError.
UtmPoint latlon_to_utm(double lat_deg, double lon_deg, int zone = 0);

/// Inverse projection; returns {lat_deg, lon_deg}.
std::pair<double, double> utm_to_latlon(const UtmPoint& p);

struct GridGeometry {
  double origin_e = 0.0;  // UTM meters, lower-left corner
  double origin_n = 0.0;
  double cell_size = 1000.0;
  int n_cols = 0;
  int n_rows = 0;
  int zone = 0;
  bool north = true;

  int cells() const { return n_cols * n_rows; }
  int cell_of(int col, int row) const { return row * n_cols + col; }
  int col_of(int cell) const { return cell % n_cols; }
  int row_of(int cell) const { return cell / n_cols; }
  bool contains(int cell) const { return cell >= 0 && cell < cells(); }

  /// Cell containing a point. Cells are half-open [x, x+s) x [y, y+s);
  /// points on the global top/right edge are clamped into the last cell.
  int cell_at(double easting, double northing) const;
};

struct CellMaps {
  std::vector<int> bus_cell;                  // k_i per bus
  std::vector<std::vector<int>> line_cells;   // sorted cell set per line
  std::vector<std::vector<int>> cell_lines;   // lines passing each cell
  std::vector<int> cells_with_bus;            // sorted
  std::vector<int> cells_with_line;           // sorted
};

/// Projects every bus into a single UTM zone (zone of the coordinate
/// centroid), lays a grid of square cells over the bounding rectangle and
/// computes all cell<->component mappings. Line corridors use supercover
/// traversal: every cell whose closed square the segment touches.
std::pair<GridGeometry, CellMaps> build_grid(const PowerCase& pc, double cell_size);

/// Moore neighborhood clipped at the boundary. Throws OutOfRangeError if the
/// cell is not in the grid.
std::vector<int> neighbors8(const GridGeometry& geom, int cell);

/// All cells of `geom` touched by the closed segment (e0,n0)-(e1,n1).
std::vector<int> supercover_cells(const GridGeometry& geom, double e0, double n0,
                                  double e1, double n1);

}  // namespace gridfire
