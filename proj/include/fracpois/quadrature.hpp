#pragma once

#include <functional>
#include <span>

namespace fracpois {

struct QuadPolicy {
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    int max_subdivisions = 2000;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    double abs_integral = 0.0;  // integral of |f|, a conditioning yardstick
    int intervals = 0;
    bool converged = false;
};

using Integrand = std::function<double(double)>;

// Globally adaptive 15-point Gauss-Kronrod on [a, b].  Interior breakpoints
// (outside (a, b) they are ignored) seed the initial partition.
QuadResult integrate(const Integrand& f, double a, double b, const QuadPolicy& policy = {},
                     std::span<const double> breakpoints = {});

// Same, but throws QuadratureFailure instead of returning an unconverged result.
double integrate_checked(const Integrand& f, double a, double b, const QuadPolicy& policy = {},
                         std::span<const double> breakpoints = {});

// Truncation point for an integrand whose envelope decays like exp(-rate * r):
// beyond it the envelope is below abs_tol / 10.
double tail_cutoff(double rate, double abs_tol);

}  // namespace fracpois
