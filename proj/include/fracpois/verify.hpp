#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracpois/check_report.hpp"
#include "fracpois/models.hpp"
#include "fracpois/quadrature.hpp"

namespace fracpois {

struct GridSpec {
    enum class Spacing { linear, logarithmic };
    double t_min = 0.5;
    double t_max = 2.0;
    int points = 65;
    Spacing spacing = Spacing::linear;
    void validate() const;
    std::vector<double> nodes() const;
};

struct LaplaceOptions {
    // f(t) ~ t^{c-1} times a series in t^c near the origin; c < 1 triggers t = u^{1/c}.
    double origin_exponent = 1.0;
    // |f(t)| grows at most like exp(growth_rate t); s must exceed it.
    double growth_rate = 0.0;
};

// int_0^inf e^{-st} f(t) dt, head [0, 1/(s - growth)] plus a truncated tail.
double laplace_forward(const Integrand& f, double s, const QuadPolicy& policy = {},
                       const LaplaceOptions& options = {});

// t^{c-1} E^delta_{b,c}(w t^b) against s^{b delta - c} / (s^b - w)^delta, where
// spec = {b, c, delta}.  Needs s > max(w, 0)^{1/b}.
CheckReport gml_laplace_pair(const MLSpec& spec, double w, double s, double tol = 1e-6);

// Closed-form transforms of the pmf, waiting-time densities and renewal function
// of the given model against forward quadrature, one report per (identity, s).
std::vector<CheckReport> verify_transform_pairs(const ProcessSpec& spec, std::span<const double> s_grid,
                                                double tol = 1e-6);

// (1/k!) int_0^inf e^{-rate z} z^k M_nu(z) dz with M_nu the M-Wright density.
double m_wright_laplace_moment(int k, double nu, double rate, const QuadPolicy& policy = {});

// First-order pmf as a Poisson count at the random time with M-Wright law of scale lambda t^nu.
double subordination_pmf(int k, double nu, double lambda, double t, const QuadPolicy& policy = {});

// E^{k+1}_{nu, nu k + 1}(-lambda) against its M-Wright Laplace integral.
CheckReport gml_laplace_identity(int k, double nu, double lambda, double tol = 1e-7,
                                 const QuadPolicy& policy = {});

// Max-norm residual of the governing equation of `spec` for p_k on the nodes of
// `grid` in [t_min, t_max].  The grid must be linear; the derivatives are
// discretized from t = 0 with step t_max / (points - 1).
double caputo_residual_at(const ProcessSpec& spec, int k, const GridSpec& grid);

// Residual under `halvings` successive halvings of the step; passes when each
// halving shrinks it by at least the factor max_ratio.
CheckReport caputo_residual(const ProcessSpec& spec, int k, const GridSpec& grid = {}, int halvings = 3,
                            double max_ratio = 0.75);

// sum_k k(k-1)...(k-r+1) pmf(k) against the closed-form factorial moment.
CheckReport factorial_moment_check(const ProcessSpec& spec, int r, double t, double tol = 1e-7);

// ---- named suite ----

struct SuiteOptions {
    std::optional<double> tol;  // replaces the default tolerance of deterministic checks
    int threads = 0;            // 0: hardware concurrency
};

struct SuiteGroup {
    std::string name;
    std::string description;
    bool in_default = true;
};

const std::vector<SuiteGroup>& suite_groups();

// Canonical group name for a name or alias; throws InvalidParam if unknown.
std::string resolve_group(const std::string& name);

// Runs the named groups (the default set when `only` is empty), in catalog order.
std::vector<CheckReport> run_suite(std::span<const std::string> only = {}, const SuiteOptions& options = {});

std::string reports_to_json(std::span<const CheckReport> reports);

}  // namespace fracpois
