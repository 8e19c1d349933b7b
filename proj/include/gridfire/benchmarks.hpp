#pragma once

#include <string>
#include <vector>

#include "gridfire/evaluation.hpp"
#include "gridfire/stage_models.hpp"

namespace gridfire {

struct BenchmarkResult {
  std::string tag;
  ShutoffPlan plan;
  double objective = 0.0;
  double solve_seconds = 0.0;
};

struct BenchmarkOptions {
  SolverChoice solver = SolverChoice::Auto;
  int threads = 1;
  double mip_gap = 1e-6;
};

/// Nominal-plan model: maximize load satisfaction over the horizon with no
/// disruption term. When full service is achievable the returned plan keeps
/// every component energized.
BenchmarkResult solve_deterministic(const PowerCase& pc,
                                    const BenchmarkOptions& opts = {});

struct WaitAndSeeResult {
  std::vector<double> costs;  // optimal cost per scenario
  double expected = 0.0;      // probability-weighted mean
  double solve_seconds = 0.0;
};

/// Perfect-information benchmark: each scenario planned with its disruption
/// known in advance.
WaitAndSeeResult solve_wait_and_see(const PowerCase& pc,
                                    const std::vector<DisruptionScenario>& scenarios,
                                    const BenchmarkOptions& opts = {});

/// Mean endogenous-fire footprint per component over a scenario set:
/// R_c = (1/|Omega|) sum_w |I_c^w| [u_c^w = 1], replicated across periods.
struct RiskTable {
  std::vector<double> risk;  // per flat component id
  double risk_total = 0.0;   // sum over components and periods
  double demand_total = 0.0; // sum of D_dt over loads and periods
};

RiskTable compute_risk_table(const PowerCase& pc,
                             const std::vector<DisruptionScenario>& scenarios);

/// Static risk/served trade-off model with weight alpha in [0,1]: alpha = 0
/// is pure load maximization, alpha = 1 pure risk minimization.
BenchmarkResult solve_risk_based(const PowerCase& pc, const RiskTable& risk,
                                 double alpha, const BenchmarkOptions& opts = {});

struct RobustResult {
  ShutoffPlan plan;
  double objective = 0.0;       // epigraph optimum over the final subset
  double worst_case = 0.0;      // verified worst cost over the full set
  std::vector<int> support;     // scenario indices in the final subset
  int iterations = 0;
  bool converged = false;
  double solve_seconds = 0.0;
};

/// Scenario-appending minimax: start from the costliest wait-and-see
/// scenario, solve the epigraph form over the subset, append the verified
/// worst case until it is already covered.
RobustResult solve_robust(const PowerCase& pc,
                          const std::vector<DisruptionScenario>& scenarios,
                          const BenchmarkOptions& opts = {}, int max_rounds = 0);

}  // namespace gridfire
