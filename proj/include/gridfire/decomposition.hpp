#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridfire/stage_models.hpp"

namespace gridfire {

enum class CutMode : uint8_t { LC, SMC };

/// Scenario-indexed linear lower bound on the recourse value function:
/// f(z) >= value + lambda' (z - anchor) for every binary state z.
struct Cut {
  int scenario = -1;
  std::vector<double> lambda;
  double value = 0.0;
  std::vector<uint8_t> anchor;
  int iteration = 0;
  CutMode kind = CutMode::LC;

  double evaluate(const std::vector<uint8_t>& z) const;
};

struct BoundsRecord {
  int iteration = 0;
  double lower = 0.0;
  double upper = 0.0;
  std::string incumbent_hash;
  double wall_seconds = 0.0;
};

/// Linearization of the concave dual function R(lambda):
/// R(lambda) <= intercept + gradient' lambda everywhere.
struct DualLinearization {
  double intercept = 0.0;
  std::vector<double> gradient;
};

/// Per-(scenario, anchor) cache of dual information, reused across
/// iterations and shared between the LC and SMC generators.
struct DualState {
  std::vector<DualLinearization> linearizations;
  std::vector<double> best_lambda;
  double best_value = -kInf;
  int evaluations = 0;

  /// Evaluates R at lambda, records the linearization, updates the best point.
  double probe(const PowerCase& pc, const DisruptionScenario& sc,
               const std::vector<uint8_t>& z_hat, const std::vector<double>& lambda,
               MilpSolver& solver, const SolveLimits& limits);
};

struct DualResult {
  std::vector<double> lambda;
  double value = 0.0;  // R(z_hat, lambda)
  bool converged = false;
  int evaluations = 0;
};

/// Maximizes the concave dual R(z_hat, .) with a proximal cutting-plane
/// method. `f_hat` is the known target value f(z_hat) (the dual optimum for
/// binary state); iteration stops once R is within `tol` of it.
DualResult solve_dual(const PowerCase& pc, const DisruptionScenario& sc,
                      const std::vector<uint8_t>& z_hat, double f_hat,
                      MilpSolver& solver, DualState& state, double tol = 1e-6,
                      int max_iters = 200);

/// Square-minimization cut: the minimum-norm gradient whose dual value stays
/// within a delta neighborhood of f_hat, found by QP row generation over the
/// cached linearizations. Falls back to the plain Lagrangian cut when the
/// row-generation iteration cap is hit.
Cut smc_cut(const PowerCase& pc, const DisruptionScenario& sc,
            const std::vector<uint8_t>& z_hat, double delta, double f_hat,
            MilpSolver& solver, DualState& state, int scenario_index,
            int iteration, double tol = 1e-6);

struct MasterModel {
  LinearModel model;
  FirstStageVars first_stage;
  std::vector<int> value_var;  // V per scenario; -1 for non-disruptive
};

MasterModel build_master(const PowerCase& pc,
                         const std::vector<DisruptionScenario>& scenarios,
                         const std::vector<Cut>& pool);

struct DecompositionOptions {
  double epsilon = 0.01;            // relative gap target
  double delta = 1e-4;              // SMC anchor tolerance
  CutMode mode = CutMode::LC;
  int max_iterations = 500;
  double time_limit_seconds = kInf;
  SolverChoice solver = SolverChoice::Auto;
  int threads = 1;
  double subproblem_gap = 1e-9;
  double master_gap = 1e-6;
  double dual_tol = 1e-6;           // relative to f_hat
  std::string checkpoint_path;      // written every iteration when set
  bool resume = false;
};

struct DecompositionResult {
  ShutoffPlan incumbent;
  double lower = 0.0;
  double upper = kInf;
  double gap = kInf;
  bool converged = false;
  int iterations = 0;
  std::vector<BoundsRecord> log;
  std::vector<Cut> pool;
};

/// Iterative master/subproblem loop: solve the cut-approximated master,
/// evaluate the true recourse at the master's state, update bounds, add one
/// cut per scenario at the new anchor. Terminates at relative gap epsilon.
DecompositionResult run_decomposition(const PowerCase& pc,
                                      const std::vector<DisruptionScenario>& scenarios,
                                      const DecompositionOptions& opts);

void write_bounds_csv(const std::string& path, const std::vector<BoundsRecord>& log);

std::string plan_hash(const ShutoffPlan& plan);

void write_checkpoint(const std::string& path, const DecompositionResult& state,
                      const std::string& case_hash);
bool read_checkpoint(const std::string& path, const std::string& case_hash,
                     DecompositionResult& state);

}  // namespace gridfire
