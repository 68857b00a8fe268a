#pragma once

#include <functional>

namespace kacsim {

/// Adaptive Simpson quadrature of f over [a, b] to the given absolute
/// tolerance. Handles integrands with mild endpoint singularities in the
/// derivative (|sin t|^a near 0) by recursive bisection.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, int max_depth = 60);

/// |x|^gamma with the convention 0^0 := 0: returns 0 whenever x == 0,
/// for every gamma >= 0.
double pow_abs(double x, double gamma);

} // namespace kacsim
