#include "gridfire/linear_model.hpp"

#include <cstdlib>
#include <sstream>

namespace gridfire {

int LinearModel::add_variable(const std::string& name, double lower, double upper,
                              VarKind kind) {
  if (lower > upper)
    throw ModelBuildError("variable " + name + ": lower bound exceeds upper bound");
  if (kind == VarKind::Binary && (lower < 0.0 || upper > 1.0))
    throw ModelBuildError("variable " + name + ": binary bounds must lie within [0,1]");
  ModelVariable v;
  v.name = name;
  v.lower = lower;
  v.upper = upper;
  v.kind = kind;
  vars_.push_back(std::move(v));
  obj_.push_back(0.0);
  return static_cast<int>(vars_.size()) - 1;
}

void LinearModel::check_var(int var) const {
  if (var < 0 || var >= static_cast<int>(vars_.size()))
    throw ModelBuildError("unknown variable index " + std::to_string(var));
}

int LinearModel::add_constraint(std::vector<std::pair<int, double>> terms,
                                ConstraintSense sense, double rhs) {
  for (const auto& [v, c] : terms) {
    check_var(v);
    (void)c;
  }
  ModelConstraint con;
  con.terms = std::move(terms);
  con.sense = sense;
  con.rhs = rhs;
  cons_.push_back(std::move(con));
  return static_cast<int>(cons_.size()) - 1;
}

void LinearModel::set_objective_coefficient(int var, double coeff) {
  check_var(var);
  obj_[var] = coeff;
}

void LinearModel::add_objective_coefficient(int var, double coeff) {
  check_var(var);
  obj_[var] += coeff;
}

void LinearModel::set_warm_start(int var, double value) {
  check_var(var);
  vars_[var].warm = value;
}

void LinearModel::fix_variable(int var, double value) {
  check_var(var);
  vars_[var].lower = value;
  vars_[var].upper = value;
}

bool LinearModel::has_integers() const {
  for (const ModelVariable& v : vars_)
    if (v.kind == VarKind::Binary && v.lower < v.upper) return true;
  return false;
}

std::string LinearModel::to_lp_string() const {
  std::ostringstream os;
  os << "Minimize\n obj:";
  bool any = false;
  for (size_t j = 0; j < vars_.size(); ++j) {
    if (obj_[j] == 0.0) continue;
    os << (obj_[j] >= 0 ? " + " : " - ") << std::abs(obj_[j]) << " x" << j;
    any = true;
  }
  if (!any) os << " 0 x0";
  os << "\nSubject To\n";
  for (size_t i = 0; i < cons_.size(); ++i) {
    os << " c" << i << ":";
    for (const auto& [v, c] : cons_[i].terms)
      os << (c >= 0 ? " + " : " - ") << std::abs(c) << " x" << v;
    switch (cons_[i].sense) {
      case ConstraintSense::LessEqual: os << " <= "; break;
      case ConstraintSense::GreaterEqual: os << " >= "; break;
      case ConstraintSense::Equal: os << " = "; break;
    }
    os << cons_[i].rhs << "\n";
  }
  os << "Bounds\n";
  for (size_t j = 0; j < vars_.size(); ++j) {
    os << " ";
    if (vars_[j].lower == -kInf)
      os << "-inf";
    else
      os << vars_[j].lower;
    os << " <= x" << j << " <= ";
    if (vars_[j].upper == kInf)
      os << "+inf";
    else
      os << vars_[j].upper;
    os << "\n";
  }
  bool bin = false;
  for (size_t j = 0; j < vars_.size(); ++j)
    if (vars_[j].kind == VarKind::Binary) {
      if (!bin) {
        os << "Binaries\n";
        bin = true;
      }
      os << " x" << j;
    }
  if (bin) os << "\n";
  os << "End\n";
  return os.str();
}

SolverChoice solver_choice_from_string(const std::string& s) {
  if (s == "auto") return SolverChoice::Auto;
  if (s == "builtin") return SolverChoice::Builtin;
  if (s == "glpk") return SolverChoice::Glpk;
  throw ValidationError("unknown solver choice: " + s);
}

std::unique_ptr<MilpSolver> make_builtin_solver();
std::unique_ptr<MilpSolver> make_glpk_solver();  // throws SolverError if unavailable

std::unique_ptr<MilpSolver> make_solver(SolverChoice choice) {
  if (choice == SolverChoice::Auto) {
    if (const char* env = std::getenv("GRIDFIRE_SOLVER")) {
      choice = solver_choice_from_string(env);
      if (choice == SolverChoice::Auto)
        choice = glpk_available() ? SolverChoice::Glpk : SolverChoice::Builtin;
    } else {
      choice = glpk_available() ? SolverChoice::Glpk : SolverChoice::Builtin;
    }
  }
  if (choice == SolverChoice::Glpk) return make_glpk_solver();
  return make_builtin_solver();
}

}  // namespace gridfire
