#pragma once

#include <string_view>

#include "fracpois/quadrature.hpp"

namespace fracpois {

// E^gamma_{alpha,beta}(z) = sum_r (gamma)_r z^r / (r! Gamma(alpha r + beta)).
// gamma = 1 is the two-parameter Mittag-Leffler function.
struct MLSpec {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
};

struct SeriesPolicy {
    double rel_tol = 1e-13;
    int max_terms = 10000;
    // Above this |argument| the dispatcher prefers an integral route when one exists.
    double integral_switch_threshold = 30.0;

    // Defaults, with max_terms taken from FRACPOIS_MAX_TERMS when it is set.
    static SeriesPolicy from_environment();
};

enum class Route { series, integral, closed_form };
enum class RouteChoice { automatic, series, integral };

std::string_view route_name(Route r);

struct SeriesResult {
    double value = 0.0;
    int terms = 0;
    double cancellation = 1.0;  // max |term| / |sum|
};

struct Evaluation {
    double value = 0.0;
    Route route = Route::series;
    double cancellation = 1.0;  // amplification of rounding error on the chosen route
};

// log(1/|Gamma(z)|) and the sign of 1/Gamma(z); sign 0 at the poles.
struct LogRecipGamma {
    double log_abs;
    int sign;
};
LogRecipGamma log_recip_gamma(double z);

// ---- series ----

SeriesResult gml_series_detail(const MLSpec& spec, double x, const SeriesPolicy& policy = {});
double gml_series(const MLSpec& spec, double x, const SeriesPolicy& policy = {});
double ml_series(double alpha, double beta, double x, const SeriesPolicy& policy = {});

// |x|^power * E^gamma_{alpha,beta}(x); the power is folded into the log-space terms
// so that huge prefactors and tiny function values never meet in floating point.
SeriesResult gml_series_scaled(const MLSpec& spec, double x, double power,
                               const SeriesPolicy& policy = {});

// W_{lambda,beta}(x) = sum_k x^k / (k! Gamma(lambda k + beta)), lambda > -1.
// Throws CancellationWarning once max|term| / |sum| exceeds max_cancellation.
SeriesResult wright_series_detail(double lambda, double beta, double x,
                                  const SeriesPolicy& policy = {});
double wright_series(double lambda, double beta, double x, const SeriesPolicy& policy = {},
                     double max_cancellation = 1e10);

// ---- integral representations on the negative axis ----

// E_{nu,1}(-t^nu), 0 < nu < 1, from the Laplace-type integral over the cut.
double ml_neg_integral(double nu, double t, const QuadPolicy& policy = {});
// Same function written as a Cauchy-distributed average over a finite angle range.
double ml_neg_cauchy_mean(double nu, double t, const QuadPolicy& policy = {});
// E_{nu,beta}(-t^nu) for 0 < beta < nu + 1.
double ml2_neg_integral(double nu, double beta, double t, const QuadPolicy& policy = {});
// E_{nu,nu}(-t^nu), the dedicated form for beta = nu.
double ml_nu_nu_neg_integral(double nu, double t, const QuadPolicy& policy = {});
// Leading large-t behaviour of E_{nu,beta}(-t^nu).
double ml_large_t_approx(double nu, double beta, double t);
// W_{nu,beta}(-t^nu) for 0 < nu <= 1/2 (beta < 1 when nu = 1/2).
double wright_neg_integral(double nu, double beta, double t, const QuadPolicy& policy = {});

// x^power * E^gamma_{nu,beta}(-x), x > 0, 0 < nu < 1, through the collapsed
// Hankel contour.  Singular small-s terms of the Laplace transform are
// inverted exactly so any beta is admissible.
double gml_cut_integral(const MLSpec& spec, double x, double power);

// W_{-nu,beta}(-x), 0 < nu < 1, beta < 1, x >= 0 via the Hankel contour.
double wright_hankel_integral(double nu, double beta, double x);

// ---- dispatchers ----

// x^power * E^gamma_{alpha,beta}(-x) for x >= 0, route picked by estimated rounding error.
Evaluation gml_neg_scaled(const MLSpec& spec, double x, double power,
                          const SeriesPolicy& policy = {},
                          RouteChoice choice = RouteChoice::automatic);

// E^gamma_{alpha,beta}(z) for real z.
Evaluation gml_eval(const MLSpec& spec, double z, const SeriesPolicy& policy = {},
                    RouteChoice choice = RouteChoice::automatic);
double gml(const MLSpec& spec, double z, const SeriesPolicy& policy = {});
double ml(double alpha, double beta, double z, const SeriesPolicy& policy = {});

// M-Wright density W_{-nu,1-nu}(-z), z >= 0, 0 < nu < 1.
Evaluation m_wright_eval(double nu, double z, const SeriesPolicy& policy = {},
                         RouteChoice choice = RouteChoice::automatic);
double m_wright(double nu, double z, const SeriesPolicy& policy = {});

}  // namespace fracpois
