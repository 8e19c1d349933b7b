#pragma once

#include <vector>

namespace gridfire {

/// Dense convex QP over the nonnegative orthant:
///    min 1/2 x'Qx + c'x   s.t.  x >= 0  [, sum x = 1 when simplex]
/// Active-set method (NNLS style); Q must be positive semidefinite. Sizes
/// here are small (bundle/cut row counts), so dense factorizations are fine.
struct NnqpResult {
  std::vector<double> x;
  double objective = 0.0;
  bool converged = false;
};

NnqpResult solve_nnqp(const std::vector<std::vector<double>>& Q,
                      const std::vector<double>& c, bool simplex,
                      int max_iters = 0);

}  // namespace gridfire
