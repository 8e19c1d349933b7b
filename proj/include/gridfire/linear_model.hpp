#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "gridfire/types.hpp"

namespace gridfire {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind : uint8_t { Continuous = 0, Binary = 1 };
enum class ConstraintSense : uint8_t { LessEqual, GreaterEqual, Equal };

struct ModelVariable {
  std::string name;
  double lower = -kInf;
  double upper = kInf;
  VarKind kind = VarKind::Continuous;
  double warm = std::numeric_limits<double>::quiet_NaN();
};

struct ModelConstraint {
  std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
  ConstraintSense sense = ConstraintSense::LessEqual;
  double rhs = 0.0;
};

/// Solver-agnostic MILP: variables with bounds/integrality, linear rows, a
/// linear minimization objective plus constant offset.
class LinearModel {
 public:
  int add_variable(const std::string& name, double lower, double upper,
                   VarKind kind = VarKind::Continuous);
  int add_binary(const std::string& name) { return add_variable(name, 0.0, 1.0, VarKind::Binary); }

  /// terms * x  (sense)  rhs. Throws ModelBuildError on unknown variables.
  int add_constraint(std::vector<std::pair<int, double>> terms, ConstraintSense sense,
                     double rhs);

  void set_objective_coefficient(int var, double coeff);
  void add_objective_coefficient(int var, double coeff);
  void add_objective_offset(double value) { obj_offset_ += value; }
  void set_warm_start(int var, double value);
  void fix_variable(int var, double value);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(cons_.size()); }
  const std::vector<ModelVariable>& variables() const { return vars_; }
  const std::vector<ModelConstraint>& constraints() const { return cons_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_offset() const { return obj_offset_; }
  bool has_integers() const;

  /// LP-format text export for debugging.
  std::string to_lp_string() const;

 private:
  void check_var(int var) const;

  std::vector<ModelVariable> vars_;
  std::vector<ModelConstraint> cons_;
  std::vector<double> obj_;
  double obj_offset_ = 0.0;
};

enum class SolveStatus : uint8_t {
  Optimal,     // proven within the requested gap
  Feasible,    // limit hit with an incumbent; gap reported
  Infeasible,
  Unbounded,
  Limit,       // limit hit with no incumbent
};

struct SolveResult {
  SolveStatus status = SolveStatus::Limit;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;
  double gap = std::numeric_limits<double>::infinity();
  double wall_seconds = 0.0;

  bool has_solution() const {
    return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
  }
};

struct SolveLimits {
  double mip_gap = 1e-6;
  double time_limit_seconds = kInf;
};

class MilpSolver {
 public:
  virtual ~MilpSolver() = default;
  virtual SolveResult solve(const LinearModel& model, const SolveLimits& limits) = 0;
  virtual std::string name() const = 0;
};

enum class SolverChoice : uint8_t { Auto, Builtin, Glpk };

/// Factory. Auto prefers GLPK when a loadable library is found (environment
/// variable GRIDFIRE_GLPK, system sonames, then the configure-time hint) and
/// falls back to the built-in branch-and-bound solver. Each returned solver
/// instance may only be used by one thread at a time; create one per worker.
std::unique_ptr<MilpSolver> make_solver(SolverChoice choice = SolverChoice::Auto);

SolverChoice solver_choice_from_string(const std::string& s);

/// True if the GLPK backend can be loaded in this process.
bool glpk_available();

}  // namespace gridfire
