#pragma once

#include <functional>

namespace rmtcov {

// Adaptive Gauss-Kronrod 15(7) on [a, b]. Bisects until the local error
// estimate |K15 - G7| meets max(abs_tol, rel_tol*|I|) distributed over the
// subintervals. Throws QuadratureFailure when the interval budget runs out.
double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                   double abs_tol = 1e-11, double rel_tol = 1e-11);

}  // namespace rmtcov
