#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracpois/errors.hpp"
#include "fracpois/special_functions.hpp"
#include "series_internal.hpp"

namespace fracpois {
namespace {

constexpr double ld_eps = 1.1e-19;
constexpr double d_eps = std::numeric_limits<double>::epsilon();

// log |term_r| of the scaled series, continuous in r, for the peak search.
double log_term(const MLSpec& s, double lx, double power, double r) {
    const detail::LogSign rg = detail::log_recip_gamma_l(static_cast<long double>(s.alpha) * r + s.beta);
    const double lrg = rg.sign == 0 ? -1e300 : static_cast<double>(rg.log_abs);
    return power * lx + r * lx + std::lgamma(s.gamma + r) - std::lgamma(s.gamma) - std::lgamma(r + 1.0) + lrg;
}

struct PeakEstimate {
    double log_peak;
    double log_first;
    double r_peak;
};

PeakEstimate series_peak(const MLSpec& s, double x, double power) {
    const double lx = std::log(x);
    auto f = [&](double r) { return log_term(s, lx, power, r); };
    double hi = 1.0;
    while (hi < 1e9 && f(2.0 * hi) > f(hi)) hi *= 2.0;
    double lo = hi > 1.0 ? hi / 2.0 : 0.0;
    double up = 2.0 * hi;
    for (int i = 0; i < 60 && up - lo > 1.0; ++i) {
        const double m1 = lo + (up - lo) / 3.0, m2 = up - (up - lo) / 3.0;
        if (f(m1) < f(m2)) lo = m1;
        else up = m2;
    }
    const double r = std::round(0.5 * (lo + up));
    const double first = std::max(f(0.0), f(1.0));
    return {std::max({f(r), f(std::floor(r)), f(std::ceil(r)), first}), first, r};
}

double series_error(const SeriesResult& s) {
    return std::abs(s.value) * s.cancellation * ld_eps * std::sqrt(static_cast<double>(s.terms) + 1.0) * 8.0 +
           std::abs(s.value) * d_eps;
}

Evaluation from_series(const SeriesResult& s, Route route = Route::series) { return {s.value, route, s.cancellation}; }

Evaluation from_contour(const detail::CutResult& c) {
    const double cond = c.value == 0.0 ? std::numeric_limits<double>::infinity() : c.abs_bound / std::abs(c.value);
    return {c.value, Route::integral, std::max(cond, 1.0)};
}

// Talbot contour first; the collapsed cut takes over when the former is poorly conditioned.
Evaluation contour(const MLSpec& spec, double x, double power) {
    Evaluation best{0.0, Route::integral, std::numeric_limits<double>::infinity()};
    try {
        best = from_contour(detail::talbot_detail(spec, x, power));
        if (best.cancellation < 1e3) return best;
    } catch (const QuadratureFailure&) {
    }
    try {
        const Evaluation cut = from_contour(detail::cut_integral_detail(spec, x, power));
        if (cut.cancellation < best.cancellation) best = cut;
    } catch (const QuadratureFailure&) {
        if (!std::isfinite(best.cancellation)) throw;
    }
    return best;
}

}  // namespace

Evaluation gml_neg_scaled(const MLSpec& spec, double x, double power, const SeriesPolicy& policy,
                          RouteChoice choice) {
    detail::check_ml_spec(spec);
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidParam("argument must be finite and x >= 0");
    if (!std::isfinite(power)) throw InvalidParam("scaling power must be finite");
    detail::check_series_policy(policy);
    if (x == 0.0) return from_series(gml_series_scaled(spec, -x, power, policy), Route::closed_form);
    if (spec.alpha == 1.0 && choice != RouteChoice::integral)
        return from_series(detail::kummer_neg_scaled(spec, x, power, policy), Route::closed_form);

    const bool contour_available = spec.alpha < 1.0;
    if (choice == RouteChoice::integral) {
        if (!contour_available) throw InvalidParam("integral route needs 0 < alpha < 1");
        return contour(spec, x, power);
    }
    if (choice == RouteChoice::series || !contour_available)
        return from_series(gml_series_scaled(spec, -x, power, policy));

    // Automatic: a cheap, well conditioned series wins outright; otherwise compare the
    // rounding error each route would incur.
    const PeakEstimate peak = series_peak(spec, x, power);
    const bool feasible = 2.0 * peak.r_peak + 60.0 < policy.max_terms && peak.log_peak < 11000.0;
    const double growth = peak.log_peak - peak.log_first;
    if (x <= policy.integral_switch_threshold && feasible && growth < std::log(1e3)) {
        try {
            const SeriesResult s = gml_series_scaled(spec, -x, power, policy);
            if (s.cancellation < 1e3) return from_series(s);
        } catch (const NonConvergence&) {
        } catch (const NumericalInstability&) {
        }
    }
    const Evaluation ce = contour(spec, x, power);
    if (ce.cancellation < 1e3 || !feasible) return ce;
    const double contour_err = std::abs(ce.value) * ce.cancellation * 4.0 * d_eps;
    const double est_series = std::exp(peak.log_peak) * ld_eps * 8.0 * std::sqrt(peak.r_peak + 1.0);
    if (est_series < contour_err) {
        try {
            const SeriesResult s = gml_series_scaled(spec, -x, power, policy);
            if (series_error(s) < contour_err) return from_series(s);
        } catch (const NonConvergence&) {
        } catch (const NumericalInstability&) {
        }
    }
    return ce;
}

Evaluation gml_eval(const MLSpec& spec, double z, const SeriesPolicy& policy, RouteChoice choice) {
    if (!std::isfinite(z)) throw InvalidParam("argument must be finite");
    if (z <= 0.0) return gml_neg_scaled(spec, -z, 0.0, policy, choice);
    if (choice == RouteChoice::integral) throw InvalidParam("integral route covers negative arguments only");
    // positive arguments: every term is positive, the series is well conditioned
    return from_series(gml_series_detail(spec, z, policy));
}

double gml(const MLSpec& spec, double z, const SeriesPolicy& policy) { return gml_eval(spec, z, policy).value; }

double ml(double alpha, double beta, double z, const SeriesPolicy& policy) {
    return gml({alpha, beta, 1.0}, z, policy);
}

Evaluation m_wright_eval(double nu, double z, const SeriesPolicy& policy, RouteChoice choice) {
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidParam("M-Wright order must lie in (0, 1)");
    if (!(z >= 0.0) || !std::isfinite(z)) throw InvalidParam("M-Wright argument must be finite and >= 0");
    if (nu == 0.5 && choice == RouteChoice::automatic)
        return {std::exp(-z * z / 4.0) / std::sqrt(std::numbers::pi), Route::closed_form, 1.0};
    // leading exponential decay; far beyond it the density is zero in double precision
    const double decay = (1.0 - nu) * std::pow(std::pow(nu, nu) * z, 1.0 / (1.0 - nu));
    if (choice == RouteChoice::automatic && decay > 760.0) return {0.0, Route::closed_form, 1.0};

    if (choice == RouteChoice::integral) {
        const detail::HankelResult h = detail::wright_saddle_detail(nu, 1.0 - nu, z);
        return {h.value, Route::integral, h.value == 0.0 ? 1.0 : h.abs_bound / std::abs(h.value)};
    }
    SeriesResult s;
    bool have_series = false;
    try {
        s = wright_series_detail(-nu, 1.0 - nu, -z, policy);
        have_series = true;
    } catch (const NonConvergence&) {
        if (choice == RouteChoice::series) throw;
    } catch (const NumericalInstability&) {
        if (choice == RouteChoice::series) throw;
    }
    if (choice == RouteChoice::series || (have_series && s.cancellation < 1e3)) return from_series(s);
    const detail::HankelResult h = detail::wright_saddle_detail(nu, 1.0 - nu, z);
    const Evaluation he{h.value, Route::integral, h.value == 0.0 ? 1.0 : h.abs_bound / std::abs(h.value)};
    if (!have_series) return he;
    return series_error(s) <= h.abs_bound * 4.0 * d_eps ? from_series(s) : he;
}

double m_wright(double nu, double z, const SeriesPolicy& policy) { return m_wright_eval(nu, z, policy).value; }

}  // namespace fracpois
