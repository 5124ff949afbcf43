#pragma once

#include <functional>
#include <vector>

namespace readout {

struct SimplexOptions {
  int max_iters = 500;
  // Stop when the objective spread over the simplex falls below
  // f_rel_tol * max(|f_best|, f_abs_floor).
  double f_rel_tol = 1e-4;
  double f_abs_floor = 1e-12;
  // Initial simplex edge length per coordinate.
  double step = 0.3;
};

struct SimplexResult {
  std::vector<double> x;
  double f = 0.0;
  int iters = 0;
  int evals = 0;
  bool converged = false;
};

// Nelder-Mead downhill simplex. Deterministic; the objective may return +inf
// to reject a point (e.g. outside a box), which drives the simplex back in.
SimplexResult minimize_simplex(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<double>& x0,
                               const SimplexOptions& options = {});

}  // namespace readout
