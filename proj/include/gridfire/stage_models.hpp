#pragma once

#include <optional>
#include <vector>

#include "gridfire/case.hpp"
#include "gridfire/linear_model.hpp"
#include "gridfire/scenario.hpp"

namespace gridfire {

/// First-stage decision: per-component energization schedule z (z[c][t],
/// t = 0..T with z[c][0] = 1) plus the nominal dispatch for t = 1..T.
struct ShutoffPlan {
  int horizon = 0;
  std::vector<std::vector<uint8_t>> z;      // [component][t], t = 0..T
  std::vector<std::vector<double>> served;  // x[load][t-1]
  std::vector<std::vector<double>> angle;   // theta[bus][t-1]
  std::vector<std::vector<double>> flow;    // P^L[line][t-1]
  std::vector<std::vector<double>> gen;     // P^G[gen][t-1]

  std::vector<uint8_t> energized_at(int t) const;
  /// Nominal load-shedding cost of period t under this plan's dispatch.
  double shed_cost(const PowerCase& pc, int t) const;
  int off_count(int t) const;
};

void write_plan(const std::string& path, const ShutoffPlan& plan,
                const std::string& case_hash, double objective, double gap);
struct PlanFile {
  ShutoffPlan plan;
  std::string case_hash;
  double objective = 0.0;
  double gap = 0.0;
};
PlanFile read_plan(const std::string& path);

/// Structural sanity of a plan against model (1)'s logic rows: monotone z,
/// bus/component implications, dispatch within bounds. Throws
/// ValidationError naming the violated rule.
void validate_plan(const PowerCase& pc, const ShutoffPlan& plan);

/// Variable handles of one dispatch period. `sw_*` are the switching
/// variables that gate flow and generation: first-stage z or second-stage y.
struct PeriodVars {
  std::vector<int> sw_bus, sw_gen, sw_line;  // -1 entries mean "constant 1"
  std::vector<int> served, angle, flow, gen;
};

/// DC power flow with switching big-Ms for one period:
/// flow bounds, angle coupling, nodal balance, generation limits.
void build_flow_block(LinearModel& model, const PowerCase& pc, int period,
                      const PeriodVars& vars);

struct FirstStageVars {
  // z[c][t-1] for t = 1..T; dispatch handles per period
  std::vector<std::vector<int>> z;
  std::vector<PeriodVars> periods;  // [t-1]
  int z_at(int flat, int t) const { return t == 0 ? -1 : z[flat][t - 1]; }
};

/// Adds all first-stage variables plus constraints (flow, component logic,
/// monotone shut-off) for every period.
FirstStageVars add_first_stage(LinearModel& model, const PowerCase& pc);

/// Logic rows of one period: x <= z_bus, z_gen <= z_bus, z_line <= z_bus at
/// both endpoints. Exposed for reuse by the second-stage builder.
void build_logic_block(LinearModel& model, const PowerCase& pc,
                       const PeriodVars& vars);

ShutoffPlan extract_plan(const PowerCase& pc, const FirstStageVars& fs,
                         const std::vector<double>& solution);

struct SecondStageOutcome {
  double objective = 0.0;    // value of the solved program
  double shed_cost = 0.0;    // sum over t >= tau of w(1-x)
  double damage_cost = 0.0;  // sum of r_c eta_c
  std::vector<uint8_t> z;    // local copies of the linking state
  std::vector<uint8_t> functional;  // y
  std::vector<uint8_t> damaged;     // eta
};

/// Exact second-stage value f(z_hat, scenario): cost-minimal recourse given
/// the energization state at tau-1. Never infeasible (all-off is feasible).
SecondStageOutcome second_stage_value(const PowerCase& pc,
                                      const DisruptionScenario& sc,
                                      const std::vector<uint8_t>& z_hat,
                                      MilpSolver& solver,
                                      const SolveLimits& limits = {});

struct LagrangianOutcome {
  double value = 0.0;            // R(z_hat, lambda)
  double stage_cost = 0.0;       // second-stage cost of the minimizer
  std::vector<uint8_t> z;        // minimizing local copy
};

/// Lagrangian relaxation of the nonanticipativity constraint: the local copy
/// z is free and the objective gains lambda' (z_hat - z).
LagrangianOutcome lagrangian_value(const PowerCase& pc, const DisruptionScenario& sc,
                                   const std::vector<uint8_t>& z_hat,
                                   const std::vector<double>& lambda,
                                   MilpSolver& solver, const SolveLimits& limits = {});

enum class ObjectiveMode : uint8_t { Expectation, WorstCase };

struct ExtensiveModel {
  LinearModel model;
  FirstStageVars first_stage;
  // per scenario (disruptive only): y/eta handles, dispatch periods
  struct ScenarioVars {
    int scenario = -1;
    std::vector<int> functional, damaged;
    std::vector<PeriodVars> periods;  // tau..T
  };
  std::vector<ScenarioVars> blocks;
  int epigraph = -1;  // WorstCase only
};

/// Deterministic-equivalent MILP over the whole scenario set, either
/// probability-weighted or with a worst-case epigraph objective.
ExtensiveModel build_extensive(const PowerCase& pc,
                               const std::vector<DisruptionScenario>& scenarios,
                               ObjectiveMode mode);

/// Splits a solved extensive model's objective into per-scenario costs.
double scenario_cost_in_extensive(const PowerCase& pc, const ExtensiveModel& em,
                                  const std::vector<DisruptionScenario>& scenarios,
                                  int scenario, const std::vector<double>& solution);

}  // namespace gridfire
