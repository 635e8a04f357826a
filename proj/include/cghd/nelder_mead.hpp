#pragma once

#include <functional>
#include <vector>

namespace cghd {

struct SimplexOptions {
  int max_iterations = 20000;
  double f_tolerance = 1e-13;   // spread of simplex values
  double x_tolerance = 1e-11;   // spread of simplex vertices
  double initial_step = 0.1;    // relative step used to seed the simplex
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free Nelder-Mead minimization. Objectives may return a large
/// finite value to express constraint violations (penalty walls).
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, const SimplexOptions& opts = {});

}  // namespace cghd
