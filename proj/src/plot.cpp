#include "gridfire/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gridfire/geo.hpp"

namespace gridfire {

namespace {

struct SvgDoc {
  std::ostringstream body;
  double width, height;
  SvgDoc(double w, double h) : width(w), height(h) {}
  std::string finish() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
       << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body.str() << "</svg>\n";
    return os.str();
  }
};

void save(const std::string& path, const SvgDoc& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write SVG: " + path);
  out << doc.finish();
}

std::string shed_color(double shed) {
  // 0 -> green, 1 -> red
  const int r = (int)std::round(40 + 200 * std::clamp(shed, 0.0, 1.0));
  const int g = (int)std::round(180 - 140 * std::clamp(shed, 0.0, 1.0));
  std::ostringstream os;
  os << "rgb(" << r << "," << g << ",60)";
  return os.str();
}

}  // namespace

void plot_network_svg(const std::string& path, const PowerCase& pc,
                      const ShutoffPlan& plan, int period) {
  if (period < 1 || period > pc.horizon)
    throw OutOfRangeError("plot period outside the horizon");
  const int zone = utm_zone_for(pc.buses[0].longitude);
  std::vector<UtmPoint> pts(pc.buses.size());
  double min_e = 1e300, max_e = -1e300, min_n = 1e300, max_n = -1e300;
  for (size_t i = 0; i < pc.buses.size(); ++i) {
    pts[i] = latlon_to_utm(pc.buses[i].latitude, pc.buses[i].longitude, zone);
    min_e = std::min(min_e, pts[i].easting);
    max_e = std::max(max_e, pts[i].easting);
    min_n = std::min(min_n, pts[i].northing);
    max_n = std::max(max_n, pts[i].northing);
  }
  const double W = 800, H = 600, pad = 40;
  const double se = (max_e > min_e) ? (W - 2 * pad) / (max_e - min_e) : 1.0;
  const double sn = (max_n > min_n) ? (H - 2 * pad) / (max_n - min_n) : 1.0;
  const double s = std::min(se, sn);
  auto X = [&](double e) { return pad + (e - min_e) * s; };
  auto Y = [&](double n) { return H - pad - (n - min_n) * s; };

  SvgDoc doc(W, H);
  const int nb = (int)pc.buses.size();
  const int ng = (int)pc.generators.size();
  for (size_t l = 0; l < pc.lines.size(); ++l) {
    const Line& ln = pc.lines[l];
    const bool on = plan.z[nb + ng + (int)l][period] != 0;
    doc.body << "<line class=\"line " << (on ? "on" : "off") << "\" x1=\""
             << X(pts[ln.from_bus].easting) << "\" y1=\"" << Y(pts[ln.from_bus].northing)
             << "\" x2=\"" << X(pts[ln.to_bus].easting) << "\" y2=\""
             << Y(pts[ln.to_bus].northing) << "\" stroke=\""
             << (on ? "#444" : "#c22") << "\" stroke-width=\"2\""
             << (on ? "" : " stroke-dasharray=\"6,4\"") << "/>\n";
  }
  for (size_t i = 0; i < pc.buses.size(); ++i) {
    double shed = 0.0, wsum = 0.0;
    for (int d : pc.bus_loads[i]) {
      shed += pc.loads[d].priority * (1.0 - plan.served[d][period - 1]);
      wsum += pc.loads[d].priority;
    }
    const double frac = wsum > 0 ? shed / wsum : 0.0;
    const bool on = plan.z[i][period] != 0;
    doc.body << "<circle class=\"bus " << (on ? "on" : "off") << "\" cx=\""
             << X(pts[i].easting) << "\" cy=\"" << Y(pts[i].northing)
             << "\" r=\"6\" fill=\"" << shed_color(frac) << "\" stroke=\""
             << (on ? "#222" : "#c22") << "\"";
    if (!on) doc.body << " stroke-dasharray=\"2,2\"";
    doc.body << "/>\n";
  }
  for (size_t g = 0; g < pc.generators.size(); ++g) {
    const int i = pc.generators[g].bus;
    const bool on = plan.z[nb + (int)g][period] != 0;
    doc.body << "<rect class=\"gen " << (on ? "on" : "off") << "\" x=\""
             << X(pts[i].easting) - 10 << "\" y=\"" << Y(pts[i].northing) - 10
             << "\" width=\"8\" height=\"8\" fill=\"" << (on ? "#46f" : "#ccc")
             << "\"/>\n";
  }
  doc.body << "<text x=\"10\" y=\"20\" font-size=\"14\">period " << period
           << ", de-energized components: " << plan.off_count(period) << "</text>\n";
  save(path, doc);
}

void plot_saa_svg(const std::string& path, const SaaStudy& study) {
  if (study.rows.empty()) throw ValidationError("SAA study has no rows to plot");
  const double W = 640, H = 480, pad = 60;
  double lo = 1e300, hi = -1e300;
  for (const SaaRow& r : study.rows) {
    lo = std::min({lo, r.lb_min, r.ub_min});
    hi = std::max({hi, r.lb_max, r.ub_max});
  }
  if (hi <= lo) hi = lo + 1.0;
  const double n = (double)study.rows.size();
  auto X = [&](int idx, double off) {
    return pad + (W - 2 * pad) * ((idx + 0.5) / n) + off;
  };
  auto Y = [&](double v) { return H - pad - (H - 2 * pad) * (v - lo) / (hi - lo); };

  SvgDoc doc(W, H);
  doc.body << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad
           << "\" y2=\"" << H - pad << "\" stroke=\"#000\"/>\n";
  doc.body << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad
           << "\" y2=\"" << H - pad << "\" stroke=\"#000\"/>\n";
  for (size_t i = 0; i < study.rows.size(); ++i) {
    const SaaRow& r = study.rows[i];
    struct Series {
      double mean, half, mn, mx, off;
      const char* color;
      const char* cls;
    } series[2] = {{r.lb_mean, r.lb_half_width, r.lb_min, r.lb_max, -12, "#26c", "lb"},
                   {r.ub_mean, r.ub_half_width, r.ub_min, r.ub_max, 12, "#c62", "ub"}};
    for (const auto& se : series) {
      const double x = X((int)i, se.off);
      doc.body << "<rect class=\"extreme " << se.cls << "\" x=\"" << x - 4 << "\" y=\""
               << Y(se.mx) << "\" width=\"8\" height=\"" << Y(se.mn) - Y(se.mx)
               << "\" fill=\"" << se.color << "\" opacity=\"0.15\"/>\n";
      doc.body << "<line class=\"ci " << se.cls << "\" x1=\"" << x << "\" y1=\""
               << Y(se.mean - se.half) << "\" x2=\"" << x << "\" y2=\""
               << Y(se.mean + se.half) << "\" stroke=\"" << se.color
               << "\" stroke-width=\"3\"/>\n";
      doc.body << "<circle class=\"mean " << se.cls << "\" cx=\"" << x << "\" cy=\""
               << Y(se.mean) << "\" r=\"4\" fill=\"" << se.color << "\"/>\n";
    }
    doc.body << "<text x=\"" << X((int)i, 0) - 10 << "\" y=\"" << H - pad + 20
             << "\" font-size=\"12\">" << r.size << "</text>\n";
  }
  doc.body << "<text x=\"" << W / 2 - 40 << "\" y=\"" << H - 10
           << "\" font-size=\"12\">sample size</text>\n";
  save(path, doc);
}

void plot_scatter_svg(const std::string& path, const std::vector<ScatterSeries>& series) {
  if (series.empty() || series[0].costs.empty())
    throw ValidationError("scatter plot has no data");
  const size_t n = series[0].costs.size();
  for (const ScatterSeries& s : series)
    if (s.costs.size() != n)
      throw ValidationError("scatter series lengths do not match");
  const double W = 800, H = 480, pad = 50;
  double hi = 0.0;
  for (const ScatterSeries& s : series)
    for (double c : s.costs) hi = std::max(hi, c);
  if (hi <= 0) hi = 1.0;
  auto X = [&](size_t i) { return pad + (W - 2 * pad) * ((double)i + 0.5) / (double)n; };
  auto Y = [&](double v) { return H - pad - (H - 2 * pad) * v / hi; };
  const char* colors[] = {"#26c", "#2a4", "#c62", "#a2c", "#888"};

  SvgDoc doc(W, H);
  doc.body << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad
           << "\" y2=\"" << H - pad << "\" stroke=\"#000\"/>\n";
  doc.body << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad
           << "\" y2=\"" << H - pad << "\" stroke=\"#000\"/>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const char* color = colors[k % 5];
    for (size_t i = 0; i < n; ++i)
      doc.body << "<circle class=\"pt s" << k << "\" cx=\"" << X(i) << "\" cy=\""
               << Y(series[k].costs[i]) << "\" r=\"3.5\" fill=\"" << color
               << "\" opacity=\"0.8\"/>\n";
    doc.body << "<text x=\"" << W - pad - 120 << "\" y=\"" << pad + 16 * (k + 1)
             << "\" font-size=\"12\" fill=\"" << color << "\">" << series[k].label
             << "</text>\n";
  }
  save(path, doc);
}

}  // namespace gridfire
