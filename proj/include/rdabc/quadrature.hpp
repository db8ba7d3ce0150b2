#ifndef RDABC_QUADRATURE_HPP_
#define RDABC_QUADRATURE_HPP_

#include <functional>

namespace rdabc {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod 15(7) on [a, b].  Subdivides the worst interval
// until the summed error estimate meets rel_tol * |integral| (or abs_tol).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-8, double abs_tol = 0.0, int max_intervals = 2000);

// Same, but throws ConvergenceError if the tolerance is not reached.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-8, double abs_tol = 0.0, int max_intervals = 2000);

}  // namespace rdabc

#endif  // RDABC_QUADRATURE_HPP_
