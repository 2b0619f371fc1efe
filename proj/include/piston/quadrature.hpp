#pragma once

#include <functional>

namespace piston::quad {

using Integrand = std::function<double(double)>;

// Adaptive Gauss-Kronrod (31 points) to relative tolerance `tol`. Tolerances
// near machine epsilon make the error estimate unreachable and force full
// bisection depth.
double adaptive(const Integrand& f, double a, double b, double tol = 1e-13);

// Double-exponential rule; tolerates integrable endpoint singularities.
double tanh_sinh(const Integrand& f, double a, double b, double tol = 1e-13);

}  // namespace piston::quad
