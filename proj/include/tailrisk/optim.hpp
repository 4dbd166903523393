#pragma once

#include <functional>
#include <vector>

namespace tailrisk {

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

struct OptimResult {
  std::vector<double> x;
  double fx = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex search. `step` sets the initial simplex edge per
// coordinate (scaled by max(1,|x0_i|)).
OptimResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0,
                        double step = 0.1, double tol = 1e-10,
                        int max_iter = 2000);

// Quasi-Newton with central-difference gradients and Armijo backtracking.
// Non-finite objective values are treated as +inf (rejected by the search).
OptimResult bfgs_minimize(const ObjectiveFn& f, std::vector<double> x0,
                          double grad_tol = 1e-7, int max_iter = 400);

// BFGS followed by a Nelder-Mead polish; returns the better of the two.
OptimResult minimize(const ObjectiveFn& f, const std::vector<double>& x0);

}  // namespace tailrisk
