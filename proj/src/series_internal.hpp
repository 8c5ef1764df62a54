#pragma once

#include "fracpois/special_functions.hpp"

namespace fracpois::detail {

struct LogSign {
    long double log_abs;
    int sign;
};

long double lgamma_pos(long double z);
long double sin_pi(long double z);
LogSign log_recip_gamma_l(long double z);
void check_ml_spec(const MLSpec& spec);
void check_series_policy(const SeriesPolicy& policy);

// x^power * E^gamma_{1,beta}(-x), x >= 0, through Kummer's transformation.
SeriesResult kummer_neg_scaled(const MLSpec& spec, double x, double power, const SeriesPolicy& policy);

}  // namespace fracpois::detail

namespace fracpois::detail {

struct CutResult {
    double value = 0.0;
    double abs_bound = 0.0;  // sum of |contributions|, for conditioning estimates
};

// x^power * E^gamma_{nu,beta}(-x) from the collapsed Hankel contour, 0 < nu < 1, x > 0.
CutResult cut_integral_detail(const MLSpec& spec, double x, double power);

// Same quantity along the Talbot contour s = r (th cot th + i th); r <= 0 picks the radius.
CutResult talbot_detail(const MLSpec& spec, double x, double power, double r = 0.0);
double talbot_radius(const MLSpec& spec, double x);

struct HankelResult {
    double value = 0.0;
    double abs_bound = 0.0;
};
HankelResult wright_hankel_detail(double nu, double beta, double x);
// W_{-nu,beta}(-x) along a contour through the saddle point; well conditioned for all 0 < nu < 1.
HankelResult wright_saddle_detail(double nu, double beta, double x);

}  // namespace fracpois::detail
