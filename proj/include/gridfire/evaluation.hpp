#pragma once

#include <array>
#include <string>
#include <vector>

#include "gridfire/decomposition.hpp"
#include "gridfire/scenario.hpp"
#include "gridfire/stage_models.hpp"

namespace gridfire {

struct ScenarioCost {
  double pre_shed = 0.0;   // plan dispatch, t < tau (full horizon when no disruption)
  double post_shed = 0.0;  // recourse shedding, t >= tau
  double damage = 0.0;     // sum of r_c eta_c
  double total() const { return pre_shed + post_shed + damage; }
};

/// Cost of executing `plan` under one realized scenario: nominal shed until
/// the disruption plus the exact recourse value afterwards.
ScenarioCost plan_scenario_cost(const PowerCase& pc, const ShutoffPlan& plan,
                                const DisruptionScenario& sc, MilpSolver& solver,
                                const SolveLimits& limits = {});

struct EvaluationReport {
  std::string plan_tag;
  std::vector<ScenarioCost> per_scenario;
  // probability-weighted aggregates
  double nondisruptive_shed = 0.0;
  double disruptive_shed = 0.0;
  double disruptive_damage = 0.0;
  double g_n = 0.0;
  double worst_case = 0.0;
  double rri = std::numeric_limits<double>::quiet_NaN();
};

struct EvaluateOptions {
  SolverChoice solver = SolverChoice::Auto;
  int threads = 1;
  double subproblem_gap = 1e-9;
};

EvaluationReport evaluate_plan(const PowerCase& pc, const ShutoffPlan& plan,
                               const std::vector<DisruptionScenario>& test_set,
                               const std::string& tag = "",
                               const EvaluateOptions& opts = {});

/// RRI of `report` against a reference out-of-sample cost.
double relative_improvement(const EvaluationReport& report, double reference_g_n);

struct SaaCell {
  int size = 0;
  int replicate = 0;
  double lower = 0.0;  // SAA optimal value
  double upper = 0.0;  // evaluation of the SAA plan on the common test set
  bool failed = false;
};

struct SaaRow {
  int size = 0;
  double lb_mean = 0.0, lb_half_width = 0.0, lb_min = 0.0, lb_max = 0.0;
  double ub_mean = 0.0, ub_half_width = 0.0, ub_min = 0.0, ub_max = 0.0;
};

struct SaaStudy {
  std::vector<SaaCell> cells;
  std::vector<SaaRow> rows;  // one per sample size, 95% t-intervals
};

struct SaaOptions {
  std::vector<int> sizes{20, 50, 100, 200};
  int replicates = 5;
  int eval_count = 1000;
  uint64_t seed = 0;
  int threads = 1;
  DecompositionOptions solve;
};

SaaStudy saa_study(const PowerCase& pc, const GridGeometry& geom, const CellMaps& maps,
                   const EnvLayers& env, const SaaOptions& opts);

struct SensitivityRow {
  double dp = 0.0;
  double objective = 0.0;  // SMIP optimum under the perturbed weights
  double nondisruptive_shed = 0.0;
  double disruptive_shed = 0.0;
  double disruptive_damage = 0.0;
  double g_n = 0.0;
  double rri = 0.0;  // vs the dp = 0 plan
};

/// Reweights the no-disruption probability by each dp, re-solves the SMIP
/// and evaluates every plan on the same test set. The base scenario set is
/// partitioned into disruptive scenarios and one merged no-disruption atom.
std::vector<SensitivityRow> sensitivity_dp(const PowerCase& pc,
                                           const std::vector<DisruptionScenario>& base,
                                           const std::vector<double>& dps,
                                           const std::vector<DisruptionScenario>& test_set,
                                           const DecompositionOptions& solve_opts,
                                           const EvaluateOptions& eval_opts = {});

struct InteractionStudy {
  // index 0 = exogenous-only, 1 = mixed, 2 = endogenous-only
  std::array<ShutoffPlan, 3> plans;
  std::array<std::array<EvaluationReport, 3>, 3> reports;  // [plan][test set]
  static const char* label(int i);
};

InteractionStudy interaction_study(const PowerCase& pc, const GridGeometry& geom,
                                   const CellMaps& maps, const EnvLayers& env,
                                   int train_count, int eval_count, uint64_t seed,
                                   const DecompositionOptions& solve_opts,
                                   const EvaluateOptions& eval_opts = {});

}  // namespace gridfire
