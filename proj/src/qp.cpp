#include "gridfire/qp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace gridfire {

namespace {

// Minimizer of 1/2 x'Qx + c'x restricted to support S (x_i = 0 off S),
// with an optional sum-to-one equality. Solves the KKT system with a tiny
// ridge for rank safety. Returns x_S and the equality multiplier.
Eigen::VectorXd solve_support(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c,
                              const std::vector<int>& S, bool simplex, double& mu) {
  const int k = static_cast<int>(S.size());
  const int dim = k + (simplex ? 1 : 0);
  Eigen::MatrixXd K(dim, dim);
  Eigen::VectorXd rhs(dim);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) K(a, b) = Q(S[a], S[b]);
    K(a, a) += 1e-12;
    rhs[a] = -c[S[a]];
  }
  if (simplex) {
    for (int a = 0; a < k; ++a) {
      K(a, k) = 1.0;
      K(k, a) = 1.0;
    }
    K(k, k) = 0.0;
    rhs[k] = 1.0;
  }
  Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  mu = simplex ? sol[k] : 0.0;
  return sol.head(k);
}

}  // namespace

NnqpResult solve_nnqp(const std::vector<std::vector<double>>& Qv,
                      const std::vector<double>& cv, bool simplex, int max_iters) {
  const int n = static_cast<int>(cv.size());
  NnqpResult out;
  out.x.assign(n, 0.0);
  if (n == 0) {
    out.converged = true;
    return out;
  }
  Eigen::MatrixXd Q(n, n);
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    c[i] = cv[i];
    for (int j = 0; j < n; ++j) Q(i, j) = Qv[i][j];
  }
  const double tol = 1e-10 * std::max(1.0, c.cwiseAbs().maxCoeff());
  if (max_iters <= 0) max_iters = 20 * n + 50;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<int> S;
  if (simplex) {
    // start from the single best vertex
    int best = 0;
    double bv = 0.5 * Q(0, 0) + c[0];
    for (int i = 1; i < n; ++i) {
      const double v = 0.5 * Q(i, i) + c[i];
      if (v < bv) {
        bv = v;
        best = i;
      }
    }
    S = {best};
    x[best] = 1.0;
  }

  for (int iter = 0; iter < max_iters; ++iter) {
    double mu = 0.0;
    Eigen::VectorXd xs;
    if (!S.empty()) xs = solve_support(Q, c, S, simplex, mu);

    // walk from x toward the support minimizer, dropping blockers
    bool dropped = false;
    if (!S.empty()) {
      double alpha = 1.0;
      int blocker = -1;
      for (size_t a = 0; a < S.size(); ++a) {
        const double cur = x[S[a]], tgt = xs[a];
        if (tgt < -1e-14 && cur > tgt) {
          const double step = cur / (cur - tgt);
          if (step < alpha) {
            alpha = step;
            blocker = static_cast<int>(a);
          }
        }
      }
      if (blocker >= 0) {
        for (size_t a = 0; a < S.size(); ++a)
          x[S[a]] = x[S[a]] + alpha * (xs[a] - x[S[a]]);
        x[S[blocker]] = 0.0;
        S.erase(S.begin() + blocker);
        dropped = true;
      } else {
        for (size_t a = 0; a < S.size(); ++a) x[S[a]] = std::max(xs[a], 0.0);
      }
    }
    if (dropped) continue;

    // optimality: gradient g = Qx + c; off-support must satisfy g_i >= mu
    Eigen::VectorXd g = Q * x + c;
    mu = 0.0;
    if (simplex && !S.empty()) {
      // multiplier equals the (equal) gradient over the support
      mu = g[S[0]];
      for (int s : S) mu = std::min(mu, g[s]);
    }
    int add = -1;
    double worst = -tol;
    for (int i = 0; i < n; ++i) {
      if (std::find(S.begin(), S.end(), i) != S.end()) continue;
      const double viol = g[i] - (simplex ? mu : 0.0);
      if (viol < worst) {
        worst = viol;
        add = i;
      }
    }
    if (add < 0) {
      out.converged = true;
      break;
    }
    S.push_back(add);
  }

  for (int i = 0; i < n; ++i) out.x[i] = x[i];
  Eigen::VectorXd xe = x;
  out.objective = 0.5 * xe.dot(Q * xe) + c.dot(xe);
  return out;
}

}  // namespace gridfire
