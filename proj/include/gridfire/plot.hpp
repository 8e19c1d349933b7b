#pragma once

#include <string>
#include <vector>

#include "gridfire/case.hpp"
#include "gridfire/evaluation.hpp"
#include "gridfire/stage_models.hpp"

namespace gridfire {

/// Network snapshot at one period: buses as circles colored by shed share,
/// lines solid when energized and dashed when de-energized.
void plot_network_svg(const std::string& path, const PowerCase& pc,
                      const ShutoffPlan& plan, int period);

/// Lower/upper bound means with 95% confidence bars and min/max whiskers per
/// sample size.
void plot_saa_svg(const std::string& path, const SaaStudy& study);

/// Per-scenario cost scatter for up to a handful of plans; scenarios on the
/// x axis, cost on the y axis, one marker series per plan.
struct ScatterSeries {
  std::string label;
  std::vector<double> costs;
};
void plot_scatter_svg(const std::string& path, const std::vector<ScatterSeries>& series);

}  // namespace gridfire
