#pragma once

#include <functional>

namespace switchstab {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int intervals = 0;
  bool converged = false;
};

/// Globally adaptive Gauss–Kronrod (7/15) integration of f over [a, b].
/// Bisects the worst interval until the summed error estimate is below
/// max(abs_tol, rel_tol * |integral|) or `max_intervals` is reached.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double rel_tol = 1e-10, double abs_tol = 1e-300,
                                    int max_intervals = 2000);

}  // namespace switchstab
