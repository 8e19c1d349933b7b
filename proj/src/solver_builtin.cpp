#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>
#include <vector>

#include <Eigen/Dense>

#include "gridfire/linear_model.hpp"

namespace gridfire {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kIntTol = 1e-6;

enum class VarStatus : uint8_t { Basic, AtLower, AtUpper, FreeZero };

// Bounded-variable primal simplex on the system [A | -I] y = 0 where the
// slack of each row carries the row activity bounds. Phase 1 drives bound
// violations of the starting slack basis to zero with composite costs.
class Simplex {
 public:
  enum class Outcome { Optimal, Infeasible, Unbounded, IterLimit };

  Simplex(const LinearModel& model, const std::vector<double>& lb,
          const std::vector<double>& ub)
      : n_(model.num_variables()), m_(model.num_constraints()) {
    cols_.resize(n_ + m_);
    lower_.resize(n_ + m_);
    upper_.resize(n_ + m_);
    cost_.assign(n_ + m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      lower_[j] = lb[j];
      upper_[j] = ub[j];
      cost_[j] = model.objective()[j];
    }
    const auto& cons = model.constraints();
    for (int i = 0; i < m_; ++i) {
      for (const auto& [v, c] : cons[i].terms)
        if (c != 0.0) cols_[v].push_back({i, c});
      const int s = n_ + i;
      cols_[s].push_back({i, -1.0});
      switch (cons[i].sense) {
        case ConstraintSense::LessEqual:
          lower_[s] = -kInf;
          upper_[s] = cons[i].rhs;
          break;
        case ConstraintSense::GreaterEqual:
          lower_[s] = cons[i].rhs;
          upper_[s] = kInf;
          break;
        case ConstraintSense::Equal:
          lower_[s] = cons[i].rhs;
          upper_[s] = cons[i].rhs;
          break;
      }
    }
  }

  Outcome run(int max_iters = 50000) {
    basis_.resize(m_);
    status_.assign(n_ + m_, VarStatus::AtLower);
    value_.assign(n_ + m_, 0.0);
    in_basis_.assign(n_ + m_, false);
    for (int j = 0; j < n_ + m_; ++j) {
      if (lower_[j] > upper_[j] + kFeasTol) return Outcome::Infeasible;
      if (std::isfinite(lower_[j])) {
        status_[j] = VarStatus::AtLower;
        value_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        status_[j] = VarStatus::AtUpper;
        value_[j] = upper_[j];
      } else {
        status_[j] = VarStatus::FreeZero;
        value_[j] = 0.0;
      }
    }
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      basis_[i] = s;
      status_[s] = VarStatus::Basic;
      in_basis_[s] = true;
    }
    binv_ = Eigen::MatrixXd::Identity(m_, m_) * -1.0;  // basis of slack columns is -I
    recompute_basics();

    // Phase 1
    if (total_infeasibility() > kFeasTol) {
      Outcome r = iterate(true, max_iters);
      if (r == Outcome::IterLimit) return r;
      if (total_infeasibility() > 1e-6) return Outcome::Infeasible;
    }
    // Phase 2
    return iterate(false, max_iters);
  }

  double objective(const LinearModel& model) const {
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += model.objective()[j] * value_[j];
    return obj;
  }
  std::vector<double> primal() const {
    return std::vector<double>(value_.begin(), value_.begin() + n_);
  }

 private:
  void recompute_basics() {
    // x_B = -B^{-1} N x_N
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < n_ + m_; ++j) {
      if (in_basis_[j] || value_[j] == 0.0) continue;
      for (const auto& [i, a] : cols_[j]) rhs[i] -= a * value_[j];
    }
    Eigen::VectorXd xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) value_[basis_[i]] = xb[i];
  }

  void refactorize() {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i)
      for (const auto& [r, a] : cols_[basis_[i]]) B(r, i) = a;
    binv_ = B.partialPivLu().inverse();
    recompute_basics();
  }

  double infeas_cost(int j, double& delta) const {
    // piecewise cost of an out-of-bounds basic variable
    if (value_[j] < lower_[j] - kFeasTol) {
      delta = lower_[j] - value_[j];
      return -1.0;
    }
    if (value_[j] > upper_[j] + kFeasTol) {
      delta = value_[j] - upper_[j];
      return 1.0;
    }
    delta = 0.0;
    return 0.0;
  }

  double total_infeasibility() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) {
      double d;
      infeas_cost(basis_[i], d);
      s += d;
    }
    return s;
  }

  Outcome iterate(bool phase1, int max_iters) {
    int stall = 0;
    double last_obj = 1e300;
    for (int iter = 0; iter < max_iters; ++iter) {
      if (iter % 128 == 0 && iter > 0) refactorize();

      // duals for the working cost vector
      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) {
        const int j = basis_[i];
        if (phase1) {
          double d;
          cb[i] = infeas_cost(j, d);
        } else {
          cb[i] = cost_[j];
        }
      }
      Eigen::VectorXd y = binv_.transpose() * cb;

      if (phase1 && total_infeasibility() <= kFeasTol) return Outcome::Optimal;

      const bool bland = stall > 2000;
      int enter = -1, dir = 0;
      double best = phase1 ? -1e-9 : -kDualTol;
      for (int j = 0; j < n_ + m_; ++j) {
        if (in_basis_[j]) continue;
        if (lower_[j] == upper_[j]) continue;  // fixed
        double cj = phase1 ? 0.0 : cost_[j];
        double dj = cj;
        for (const auto& [i, a] : cols_[j]) dj -= y[i] * a;
        int d = 0;
        if (status_[j] == VarStatus::AtLower || status_[j] == VarStatus::FreeZero) {
          if (dj < -kDualTol) d = +1;
        }
        if (d == 0 && (status_[j] == VarStatus::AtUpper || status_[j] == VarStatus::FreeZero)) {
          if (dj > kDualTol) d = -1;
        }
        if (d == 0) continue;
        const double score = -std::abs(dj);
        if (bland) {
          enter = j;
          dir = d;
          break;
        }
        if (score < best) {
          best = score;
          enter = j;
          dir = d;
        }
      }
      if (enter < 0) {
        if (phase1) return Outcome::Optimal;  // caller checks remaining infeasibility
        return Outcome::Optimal;
      }

      // direction of basics when entering moves by +dir
      Eigen::VectorXd acol = Eigen::VectorXd::Zero(m_);
      for (const auto& [i, a] : cols_[enter]) acol[i] = a;
      Eigen::VectorXd w = binv_ * acol;  // x_B changes by -w * step * dir

      // ratio test
      double limit = upper_[enter] - lower_[enter];  // bound-to-bound move
      if (!std::isfinite(limit)) limit = kInf;
      int leave = -1;       // index within basis
      double leave_to = 0;  // bound value the leaving variable lands on
      for (int i = 0; i < m_; ++i) {
        const double rate = -w[i] * dir;  // d value_[basis_i] / d step
        if (std::abs(rate) < kPivotTol) continue;
        const int j = basis_[i];
        const double v = value_[j];
        double bound;
        if (phase1) {
          // infeasible basics block only at the bound they approach
          if (v < lower_[j] - kFeasTol) {
            bound = rate > 0 ? lower_[j] : -kInf;
          } else if (v > upper_[j] + kFeasTol) {
            bound = rate > 0 ? kInf : upper_[j];
          } else {
            bound = rate > 0 ? upper_[j] : lower_[j];
          }
        } else {
          bound = rate > 0 ? upper_[j] : lower_[j];
        }
        if (!std::isfinite(bound)) continue;
        const double ratio = (bound - v) / rate;
        if (ratio < limit - 1e-12 ||
            (leave >= 0 && ratio < limit + 1e-12 && j < basis_[leave])) {
          limit = std::max(ratio, 0.0);
          leave = i;
          leave_to = bound;
        }
      }

      if (leave < 0 && !std::isfinite(limit)) {
        return phase1 ? Outcome::Infeasible : Outcome::Unbounded;
      }

      // track stalling for the Bland switch
      const double probe = phase1 ? total_infeasibility() : objective_now();
      if (probe < last_obj - 1e-12) {
        stall = 0;
        last_obj = probe;
      } else {
        ++stall;
      }

      value_[enter] += limit * dir;
      for (int i = 0; i < m_; ++i) value_[basis_[i]] -= w[i] * limit * dir;

      if (leave < 0) {
        // bound-to-bound move of the entering variable
        status_[enter] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        value_[enter] = dir > 0 ? upper_[enter] : lower_[enter];
        continue;
      }

      const int out = basis_[leave];
      value_[out] = leave_to;
      status_[out] =
          (leave_to == upper_[out]) ? VarStatus::AtUpper : VarStatus::AtLower;
      in_basis_[out] = false;
      basis_[leave] = enter;
      status_[enter] = VarStatus::Basic;
      in_basis_[enter] = true;

      // eta update: B_new^{-1} = E * B^{-1}
      const double piv = w[leave];
      if (std::abs(piv) < kPivotTol) {
        refactorize();
        continue;
      }
      Eigen::VectorXd row = binv_.row(leave) / piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave) continue;
        if (w[i] != 0.0) binv_.row(i) -= w[i] * row.transpose();
      }
      binv_.row(leave) = row.transpose();
    }
    return Outcome::IterLimit;
  }

  double objective_now() const {
    double obj = 0.0;
    for (int j = 0; j < n_ + m_; ++j) obj += cost_[j] * value_[j];
    return obj;
  }

  int n_, m_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> lower_, upper_, cost_;
  std::vector<int> basis_;
  std::vector<VarStatus> status_;
  std::vector<double> value_;
  std::vector<bool> in_basis_;
  Eigen::MatrixXd binv_;
};

struct LpOutcome {
  Simplex::Outcome status;
  double objective = 0.0;
  std::vector<double> x;
};

LpOutcome solve_lp(const LinearModel& model, const std::vector<double>& lb,
                   const std::vector<double>& ub) {
  Simplex s(model, lb, ub);
  LpOutcome out;
  out.status = s.run();
  if (out.status == Simplex::Outcome::Optimal) {
    out.objective = s.objective(model);
    out.x = s.primal();
  }
  return out;
}

class BuiltinSolver final : public MilpSolver {
 public:
  std::string name() const override { return "builtin"; }

  SolveResult solve(const LinearModel& model, const SolveLimits& limits) override {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    const int n = model.num_variables();
    std::vector<double> lb(n), ub(n);
    std::vector<int> bins;
    for (int j = 0; j < n; ++j) {
      lb[j] = model.variables()[j].lower;
      ub[j] = model.variables()[j].upper;
      if (model.variables()[j].kind == VarKind::Binary && lb[j] < ub[j]) bins.push_back(j);
    }

    SolveResult res;
    res.gap = kInf;

    double incumbent = kInf;
    std::vector<double> incumbent_x;

    // Warm-start hint: if every branching binary carries a hint, try the
    // hinted assignment as an initial incumbent.
    bool hinted = !bins.empty();
    for (int j : bins)
      if (std::isnan(model.variables()[j].warm)) hinted = false;
    if (hinted) {
      std::vector<double> hlb = lb, hub = ub;
      for (int j : bins) {
        const double v = model.variables()[j].warm >= 0.5 ? 1.0 : 0.0;
        hlb[j] = hub[j] = v;
      }
      LpOutcome h = solve_lp(model, hlb, hub);
      if (h.status == Simplex::Outcome::Optimal) {
        incumbent = h.objective;
        incumbent_x = std::move(h.x);
      }
    }

    struct Node {
      double bound;
      uint64_t seq;
      std::vector<std::pair<int, int>> fixes;
      bool operator<(const Node& o) const {
        if (bound != o.bound) return bound > o.bound;  // min-heap on bound
        return seq < o.seq;                            // newer first (plunge)
      }
    };
    std::priority_queue<Node> open;
    uint64_t seq = 0;
    open.push({-kInf, seq++, {}});
    double best_bound = -kInf;
    const double scale = 1.0;

    while (!open.empty()) {
      if (elapsed() > limits.time_limit_seconds) {
        res.wall_seconds = elapsed();
        if (std::isfinite(incumbent)) {
          res.status = SolveStatus::Feasible;
          res.objective = incumbent + model.objective_offset();
          res.values = incumbent_x;
          res.gap = std::isfinite(best_bound)
                        ? (incumbent - best_bound) / std::max(1.0, std::abs(incumbent))
                        : kInf;
        } else {
          res.status = SolveStatus::Limit;
        }
        return res;
      }
      Node node = open.top();
      open.pop();
      best_bound = node.bound;
      if (std::isfinite(incumbent) && node.bound >= incumbent - 1e-9 * scale) {
        best_bound = incumbent;
        break;  // bound-dominated; done
      }

      std::vector<double> nlb = lb, nub = ub;
      for (auto [j, v] : node.fixes) {
        nlb[j] = nub[j] = v;
      }
      LpOutcome lp = solve_lp(model, nlb, nub);
      if (lp.status == Simplex::Outcome::Infeasible) continue;
      if (lp.status == Simplex::Outcome::Unbounded) {
        if (node.fixes.empty() && bins.empty()) {
          res.status = SolveStatus::Unbounded;
          res.wall_seconds = elapsed();
          return res;
        }
        // unbounded relaxation of a restricted node: treat as unbounded model
        res.status = SolveStatus::Unbounded;
        res.wall_seconds = elapsed();
        return res;
      }
      if (lp.status == Simplex::Outcome::IterLimit)
        throw SolverError("builtin simplex hit its iteration limit");

      if (std::isfinite(incumbent) && lp.objective >= incumbent - 1e-9) continue;

      int branch = -1;
      double worst = kIntTol;
      for (int j : bins) {
        const double f = std::abs(lp.x[j] - std::round(lp.x[j]));
        if (f > worst) {
          worst = f;
          branch = j;
        }
      }
      if (branch < 0) {
        if (lp.objective < incumbent) {
          incumbent = lp.objective;
          incumbent_x = lp.x;
        }
        continue;
      }
      const int pref = lp.x[branch] >= 0.5 ? 1 : 0;
      for (int side = 0; side < 2; ++side) {
        Node child;
        child.bound = lp.objective;
        child.seq = seq++;
        child.fixes = node.fixes;
        child.fixes.push_back({branch, side == 0 ? pref : 1 - pref});
        open.push(std::move(child));
      }
    }

    res.wall_seconds = elapsed();
    if (!std::isfinite(incumbent)) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    res.status = SolveStatus::Optimal;
    res.objective = incumbent + model.objective_offset();
    res.values = std::move(incumbent_x);
    if (open.empty()) best_bound = incumbent;
    res.gap = std::max(0.0, (incumbent - best_bound)) / std::max(1.0, std::abs(incumbent));
    return res;
  }
};

}  // namespace

std::unique_ptr<MilpSolver> make_builtin_solver() {
  return std::make_unique<BuiltinSolver>();
}

}  // namespace gridfire
