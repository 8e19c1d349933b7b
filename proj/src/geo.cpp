#include "gridfire/geo.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace gridfire {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

// WGS84
constexpr double kA = 6378137.0;
constexpr double kF = 1.0 / 298.257223563;
constexpr double kK0 = 0.9996;
constexpr double kFalseEasting = 500000.0;
constexpr double kFalseNorthingSouth = 10000000.0;

struct TmCoefficients {
  double n, e, rect_a;
  double alpha[6];
  double beta[6];
};

const TmCoefficients& tm() {
  static const TmCoefficients c = [] {
    TmCoefficients t{};
    const double n = kF / (2.0 - kF);
    const double n2 = n * n, n3 = n2 * n, n4 = n3 * n, n5 = n4 * n, n6 = n5 * n;
    t.n = n;
    t.e = std::sqrt(kF * (2.0 - kF));
    t.rect_a = kA / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0);
    t.alpha[0] = n / 2.0 - 2.0 * n2 / 3.0 + 5.0 * n3 / 16.0 + 41.0 * n4 / 180.0 -
                 127.0 * n5 / 288.0 + 7891.0 * n6 / 37800.0;
    t.alpha[1] = 13.0 * n2 / 48.0 - 3.0 * n3 / 5.0 + 557.0 * n4 / 1440.0 +
                 281.0 * n5 / 630.0 - 1983433.0 * n6 / 1935360.0;
    t.alpha[2] = 61.0 * n3 / 240.0 - 103.0 * n4 / 140.0 + 15061.0 * n5 / 26880.0 +
                 167603.0 * n6 / 181440.0;
    t.alpha[3] = 49561.0 * n4 / 161280.0 - 179.0 * n5 / 168.0 + 6601661.0 * n6 / 7257600.0;
    t.alpha[4] = 34729.0 * n5 / 80640.0 - 3418889.0 * n6 / 1995840.0;
    t.alpha[5] = 212378941.0 * n6 / 319334400.0;
    t.beta[0] = n / 2.0 - 2.0 * n2 / 3.0 + 37.0 * n3 / 96.0 - n4 / 360.0 -
                81.0 * n5 / 512.0 + 96199.0 * n6 / 604800.0;
    t.beta[1] = n2 / 48.0 + n3 / 15.0 - 437.0 * n4 / 1440.0 + 46.0 * n5 / 105.0 -
                1118711.0 * n6 / 3870720.0;
    t.beta[2] = 17.0 * n3 / 480.0 - 37.0 * n4 / 840.0 - 209.0 * n5 / 4480.0 +
                5569.0 * n6 / 90720.0;
    t.beta[3] = 4397.0 * n4 / 161280.0 - 11.0 * n5 / 504.0 - 830251.0 * n6 / 7257600.0;
    t.beta[4] = 4583.0 * n5 / 161280.0 - 108847.0 * n6 / 3991680.0;
    t.beta[5] = 20648693.0 * n6 / 638668800.0;
    return t;
  }();
  return c;
}

double central_meridian(int zone) { return (zone * 6.0 - 183.0) * kDeg; }

// tau' -> tau Newton inversion (Karney). tau = tan(phi).
double tau_from_taup(double taup, double e) {
  const double e2m = 1.0 - e * e;
  double tau = taup / e2m;  // first guess, exact for small flattening at poles
  for (int i = 0; i < 8; ++i) {
    const double sig = std::sinh(e * std::atanh(e * tau / std::hypot(1.0, tau)));
    const double taupa = std::hypot(1.0, sig) * tau - sig * std::hypot(1.0, tau);
    const double dtau = (taup - taupa) * (1.0 + e2m * tau * tau) /
                        (e2m * std::hypot(1.0, tau) * std::hypot(1.0, taupa));
    tau += dtau;
    if (std::abs(dtau) < 1e-14 * std::max(1.0, std::abs(tau))) break;
  }
  return tau;
}

}  // namespace

int utm_zone_for(double lon_deg) {
  double lon = std::fmod(lon_deg + 180.0, 360.0);
  if (lon < 0) lon += 360.0;
  lon -= 180.0;
  int zone = static_cast<int>(std::floor(lon / 6.0)) + 31;
  return std::clamp(zone, 1, 60);
}

UtmPoint latlon_to_utm(double lat_deg, double lon_deg, int zone) {
  if (std::abs(lat_deg) > 84.0)
    throw OutOfDomainError("latitude " + std::to_string(lat_deg) +
                           " outside UTM domain (|lat| <= 84)");
  if (zone == 0) zone = utm_zone_for(lon_deg);
  const TmCoefficients& c = tm();
  const double phi = lat_deg * kDeg;
  const double dlam = lon_deg * kDeg - central_meridian(zone);

  const double s = std::sin(phi);
  const double t = std::sinh(std::atanh(s) - c.e * std::atanh(c.e * s));
  const double xip = std::atan2(t, std::cos(dlam));
  const double etap = std::asinh(std::sin(dlam) / std::hypot(t, std::cos(dlam)));

  double xi = xip, eta = etap;
  for (int j = 0; j < 6; ++j) {
    xi += c.alpha[j] * std::sin(2.0 * (j + 1) * xip) * std::cosh(2.0 * (j + 1) * etap);
    eta += c.alpha[j] * std::cos(2.0 * (j + 1) * xip) * std::sinh(2.0 * (j + 1) * etap);
  }

  UtmPoint out;
  out.zone = zone;
  out.north = lat_deg >= 0.0;
  out.easting = kFalseEasting + kK0 * c.rect_a * eta;
  out.northing = kK0 * c.rect_a * xi + (out.north ? 0.0 : kFalseNorthingSouth);
  return out;
}

std::pair<double, double> utm_to_latlon(const UtmPoint& p) {
  const TmCoefficients& c = tm();
  const double xi = (p.northing - (p.north ? 0.0 : kFalseNorthingSouth)) / (kK0 * c.rect_a);
  const double eta = (p.easting - kFalseEasting) / (kK0 * c.rect_a);

  double xip = xi, etap = eta;
  for (int j = 0; j < 6; ++j) {
    xip -= c.beta[j] * std::sin(2.0 * (j + 1) * xi) * std::cosh(2.0 * (j + 1) * eta);
    etap -= c.beta[j] * std::cos(2.0 * (j + 1) * xi) * std::sinh(2.0 * (j + 1) * eta);
  }

  const double taup = std::sin(xip) / std::hypot(std::sinh(etap), std::cos(xip));
  const double tau = tau_from_taup(taup, c.e);
  const double phi = std::atan(tau);
  const double dlam = std::atan2(std::sinh(etap), std::cos(xip));
  return {phi / kDeg, (central_meridian(p.zone) + dlam) / kDeg};
}

int GridGeometry::cell_at(double easting, double northing) const {
  int col = static_cast<int>(std::floor((easting - origin_e) / cell_size));
  int row = static_cast<int>(std::floor((northing - origin_n) / cell_size));
  col = std::clamp(col, 0, n_cols - 1);
  row = std::clamp(row, 0, n_rows - 1);
  return cell_of(col, row);
}

std::vector<int> neighbors8(const GridGeometry& geom, int cell) {
  if (!geom.contains(cell)) throw OutOfRangeError("cell out of grid");
  const int col = geom.col_of(cell), row = geom.row_of(cell);
  std::vector<int> out;
  out.reserve(8);
  for (int dr = -1; dr <= 1; ++dr)
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const int c2 = col + dc, r2 = row + dr;
      if (c2 < 0 || c2 >= geom.n_cols || r2 < 0 || r2 >= geom.n_rows) continue;
      out.push_back(geom.cell_of(c2, r2));
    }
  return out;
}

std::vector<int> supercover_cells(const GridGeometry& geom, double e0, double n0,
                                  double e1, double n1) {
  // Work in cell units with the origin at the grid corner.
  const double s = geom.cell_size;
  const double x0 = (e0 - geom.origin_e) / s, y0 = (n0 - geom.origin_n) / s;
  const double x1 = (e1 - geom.origin_e) / s, y1 = (n1 - geom.origin_n) / s;
  const double dx = x1 - x0, dy = y1 - y0;
  const double eps = 1e-9;

  std::set<int> cells;
  auto add_point = [&](double x, double y) {
    // A point on a cell edge/corner belongs to the closure of every
    // adjacent cell; include all of them.
    const double rx = std::round(x), ry = std::round(y);
    const bool on_vx = std::abs(x - rx) < eps;
    const bool on_hy = std::abs(y - ry) < eps;
    std::vector<int> cols, rows;
    if (on_vx) {
      cols = {static_cast<int>(rx) - 1, static_cast<int>(rx)};
    } else {
      cols = {static_cast<int>(std::floor(x))};
    }
    if (on_hy) {
      rows = {static_cast<int>(ry) - 1, static_cast<int>(ry)};
    } else {
      rows = {static_cast<int>(std::floor(y))};
    }
    for (int cc : cols)
      for (int rr : rows) {
        if (cc < 0 || cc >= geom.n_cols || rr < 0 || rr >= geom.n_rows) continue;
        cells.insert(geom.cell_of(cc, rr));
      }
  };

  // Parameter values where the segment crosses grid lines.
  std::vector<double> ts{0.0, 1.0};
  if (std::abs(dx) > eps) {
    const int klo = static_cast<int>(std::ceil(std::min(x0, x1) - eps));
    const int khi = static_cast<int>(std::floor(std::max(x0, x1) + eps));
    for (int k = klo; k <= khi; ++k) {
      const double t = (k - x0) / dx;
      if (t > eps && t < 1.0 - eps) ts.push_back(t);
    }
  }
  if (std::abs(dy) > eps) {
    const int klo = static_cast<int>(std::ceil(std::min(y0, y1) - eps));
    const int khi = static_cast<int>(std::floor(std::max(y0, y1) + eps));
    for (int k = klo; k <= khi; ++k) {
      const double t = (k - y0) / dy;
      if (t > eps && t < 1.0 - eps) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());

  for (double t : ts) add_point(x0 + t * dx, y0 + t * dy);
  for (size_t i = 0; i + 1 < ts.size(); ++i) {
    const double tm_ = 0.5 * (ts[i] + ts[i + 1]);
    const double x = x0 + tm_ * dx, y = y0 + tm_ * dy;
    const int cc = std::clamp(static_cast<int>(std::floor(x)), 0, geom.n_cols - 1);
    const int rr = std::clamp(static_cast<int>(std::floor(y)), 0, geom.n_rows - 1);
    cells.insert(geom.cell_of(cc, rr));
  }
  return {cells.begin(), cells.end()};
}

std::pair<GridGeometry, CellMaps> build_grid(const PowerCase& pc, double cell_size) {
  if (cell_size <= 0.0) throw ValidationError("cell_size must be positive");
  if (pc.buses.empty()) throw ValidationError("case has no buses to project");
  for (const Bus& b : pc.buses)
    if (!std::isfinite(b.latitude) || !std::isfinite(b.longitude))
      throw ValidationError("bus " + b.id + ": missing coordinates");

  double lat_c = 0.0, lon_c = 0.0;
  for (const Bus& b : pc.buses) {
    lat_c += b.latitude;
    lon_c += b.longitude;
  }
  lat_c /= static_cast<double>(pc.buses.size());
  lon_c /= static_cast<double>(pc.buses.size());
  const int zone = utm_zone_for(lon_c);
  const bool north = lat_c >= 0.0;

  std::vector<UtmPoint> pts(pc.buses.size());
  double min_e = 1e300, max_e = -1e300, min_n = 1e300, max_n = -1e300;
  for (size_t i = 0; i < pc.buses.size(); ++i) {
    pts[i] = latlon_to_utm(pc.buses[i].latitude, pc.buses[i].longitude, zone);
    min_e = std::min(min_e, pts[i].easting);
    max_e = std::max(max_e, pts[i].easting);
    min_n = std::min(min_n, pts[i].northing);
    max_n = std::max(max_n, pts[i].northing);
  }

  GridGeometry geom;
  geom.origin_e = min_e;
  geom.origin_n = min_n;
  geom.cell_size = cell_size;
  geom.zone = zone;
  geom.north = north;
  geom.n_cols = std::max(1, static_cast<int>(std::ceil((max_e - min_e) / cell_size - 1e-9)));
  geom.n_rows = std::max(1, static_cast<int>(std::ceil((max_n - min_n) / cell_size - 1e-9)));

  CellMaps maps;
  maps.bus_cell.resize(pc.buses.size());
  std::set<int> with_bus;
  for (size_t i = 0; i < pc.buses.size(); ++i) {
    maps.bus_cell[i] = geom.cell_at(pts[i].easting, pts[i].northing);
    with_bus.insert(maps.bus_cell[i]);
  }
  maps.cells_with_bus.assign(with_bus.begin(), with_bus.end());

  maps.line_cells.resize(pc.lines.size());
  maps.cell_lines.resize(geom.cells());
  std::set<int> with_line;
  for (size_t l = 0; l < pc.lines.size(); ++l) {
    const UtmPoint& a = pts[pc.lines[l].from_bus];
    const UtmPoint& b = pts[pc.lines[l].to_bus];
    maps.line_cells[l] =
        supercover_cells(geom, a.easting, a.northing, b.easting, b.northing);
    for (int k : maps.line_cells[l]) {
      maps.cell_lines[k].push_back(static_cast<int>(l));
      with_line.insert(k);
    }
  }
  maps.cells_with_line.assign(with_line.begin(), with_line.end());
  return {geom, maps};
}

}  // namespace gridfire
