#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "fracpois/errors.hpp"
#include "fracpois/special_functions.hpp"
#include "series_internal.hpp"

namespace fracpois {
namespace detail {

long double lgamma_pos(long double z) {
    int sign = 0;
    return ::lgammal_r(z, &sign);
}

long double sin_pi(long double z) {
    // reduce to [-1, 1) so that sin(pi z) keeps full relative accuracy near the zeros
    long double r = std::fmod(z, 2.0L);
    if (r >= 1.0L) r -= 2.0L;
    if (r < -1.0L) r += 2.0L;
    if (r == 0.0L || r == -1.0L) return 0.0L;
    if (r > 0.5L) r = 1.0L - r;
    if (r < -0.5L) r = -1.0L - r;
    return std::sin(std::numbers::pi_v<long double> * r);
}

LogSign log_recip_gamma_l(long double z) {
    if (z > 0.0L) return {-lgamma_pos(z), 1};
    if (z == std::floor(z)) return {-std::numeric_limits<long double>::infinity(), 0};
    // reflection: 1/Gamma(z) = Gamma(1 - z) sin(pi z) / pi
    const long double s = sin_pi(z);
    return {lgamma_pos(1.0L - z) + std::log(std::fabs(s)) - std::log(std::numbers::pi_v<long double>),
            s > 0 ? 1 : -1};
}

// Shared driver: term_r = |x|^(power + r) * coef_r, coef_r given in log/sign form.
template <class Coef>
SeriesResult sum_log_series(double x, double power, const SeriesPolicy& policy, Coef&& coef,
                            const char* what) {
    check_series_policy(policy);
    SeriesResult out;
    const long double lx = x == 0.0 ? 0.0L : std::log(std::fabs(static_cast<long double>(x)));
    long double sum = 0.0L, comp = 0.0L, max_abs = 0.0L;
    int small_run = 0;
    for (int r = 0; r < policy.max_terms; ++r) {
        if (x == 0.0 && r > 0) {
            out.terms = r;
            break;
        }
        const LogSign c = coef(r);
        long double term = 0.0L;
        if (c.sign != 0) {
            const long double lt = static_cast<long double>(power) * lx + r * lx + c.log_abs;
            if (lt > 11000.0L) {
                std::ostringstream msg;
                msg << what << ": terms exceed the floating-point range near r = " << r;
                throw NumericalInstability(msg.str());
            }
            term = std::exp(lt);
            if ((c.sign < 0) != (x < 0.0 && (r % 2 == 1))) term = -term;
        }
        // Neumaier compensated sum
        const long double t = sum + term;
        comp += std::fabs(sum) >= std::fabs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
        max_abs = std::max(max_abs, std::fabs(term));

        if (c.sign != 0) {
            if (std::fabs(term) <= policy.rel_tol * std::fabs(sum + comp)) {
                if (++small_run >= 3) {
                    out.terms = r + 1;
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        if (r + 1 == policy.max_terms) {
            std::ostringstream msg;
            msg << what << ": no convergence within " << policy.max_terms << " terms (x = " << x << ")";
            throw NonConvergence(msg.str());
        }
    }
    const long double total = sum + comp;
    out.value = static_cast<double>(total);
    if (!std::isfinite(out.value)) {
        std::ostringstream msg;
        msg << what << ": result outside the double range (x = " << x << ")";
        throw NumericalInstability(msg.str());
    }
    out.cancellation = total == 0.0L ? (max_abs == 0.0L ? 1.0 : std::numeric_limits<double>::infinity())
                                     : static_cast<double>(max_abs / std::fabs(total));
    return out;
}

void check_ml_spec(const MLSpec& spec) {
    if (!(spec.alpha > 0.0) || !(spec.alpha <= 1.0))
        throw InvalidParam("Mittag-Leffler alpha must lie in (0, 1]");
    if (!(spec.beta > 0.0) || !std::isfinite(spec.beta))
        throw InvalidParam("Mittag-Leffler beta must be positive and finite");
    if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma))
        throw InvalidParam("Mittag-Leffler gamma must be positive and finite");
}

void check_series_policy(const SeriesPolicy& p) {
    if (!(p.rel_tol > 0.0) || p.max_terms < 1 || !(p.integral_switch_threshold > 0.0))
        throw InvalidParam("series policy needs rel_tol > 0, max_terms >= 1 and a positive switch threshold");
}

SeriesResult kummer_neg_scaled(const MLSpec& spec, double x, double power, const SeriesPolicy& policy) {
    // E^g_{1,b}(-x) = e^{-x} sum_r (b-g)_r x^r / (r! Gamma(r+b)): no alternation when b >= g
    const long double c = static_cast<long double>(spec.beta) - spec.gamma;
    long double log_poch = 0.0L, log_fact = 0.0L;
    int poch_sign = 1;
    int last_r = -1;
    const long double shift = -static_cast<long double>(x);
    auto coef = [&](int r) -> LogSign {
        while (last_r < r - 1) {  // advance (c)_r and r! to index r
            ++last_r;
            const long double f = c + last_r;
            if (f == 0.0L) poch_sign = 0;
            else {
                log_poch += std::log(std::fabs(f));
                if (f < 0.0L) poch_sign = -poch_sign;
            }
            log_fact += std::log(static_cast<long double>(last_r + 1));
        }
        if (poch_sign == 0) return {0.0L, 0};
        const LogSign g = log_recip_gamma_l(static_cast<long double>(r) + spec.beta);
        return {shift + log_poch - log_fact + g.log_abs, poch_sign * g.sign};
    };
    // x enters as a positive argument here; the e^{-x} factor lives in the coefficients.
    SeriesResult res;
    if (c <= 0.0L && c == std::floor(c)) {
        // terminating polynomial: sum exactly the -c + 1 terms
        long double sum = 0.0L, max_abs = 0.0L;
        const long double lx = x == 0.0 ? 0.0L : std::log(static_cast<long double>(x));
        for (int r = 0; r <= static_cast<int>(-c); ++r) {
            const LogSign t = coef(r);
            if (t.sign == 0) continue;
            if (x == 0.0 && r > 0) break;
            const long double v = t.sign * std::exp(static_cast<long double>(power) * lx + r * lx + t.log_abs);
            sum += v;
            max_abs = std::max(max_abs, std::fabs(v));
        }
        res.value = static_cast<double>(sum);
        res.terms = static_cast<int>(-c) + 1;
        res.cancellation = sum == 0.0L ? 1.0 : static_cast<double>(max_abs / std::fabs(sum));
        return res;
    }
    return sum_log_series(x, power, policy, coef, "Kummer-transformed series");
}

}  // namespace detail

std::string_view route_name(Route r) {
    switch (r) {
        case Route::series: return "series";
        case Route::integral: return "integral";
        case Route::closed_form: return "closed_form";
    }
    return "unknown";
}

SeriesPolicy SeriesPolicy::from_environment() {
    SeriesPolicy p;
    if (const char* env = std::getenv("FRACPOIS_MAX_TERMS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 100000000)
            throw InvalidParam(std::string("FRACPOIS_MAX_TERMS must be a positive integer, got '") + env + "'");
        p.max_terms = static_cast<int>(v);
    }
    return p;
}

LogRecipGamma log_recip_gamma(double z) {
    const detail::LogSign r = detail::log_recip_gamma_l(z);
    return {static_cast<double>(r.log_abs), r.sign};
}

SeriesResult gml_series_scaled(const MLSpec& spec, double x, double power, const SeriesPolicy& policy) {
    detail::check_ml_spec(spec);
    if (!std::isfinite(x)) throw InvalidParam("series argument must be finite");
    if (x == 0.0 && power < 0.0) throw InvalidParam("negative power of a zero argument");
    if (x == 0.0 && power > 0.0) return {0.0, 1, 1.0};
    const long double g = spec.gamma;
    long double log_poch = 0.0L, log_fact = 0.0L;
    int last_r = -1;
    auto coef = [&](int r) -> detail::LogSign {
        while (last_r < r - 1) {
            ++last_r;
            log_poch += std::log(g + last_r);
            log_fact += std::log(static_cast<long double>(last_r + 1));
        }
        const detail::LogSign rg = detail::log_recip_gamma_l(static_cast<long double>(spec.alpha) * r + spec.beta);
        return {log_poch - log_fact + rg.log_abs, rg.sign};
    };
    return detail::sum_log_series(x, power, policy, coef, "Mittag-Leffler series");
}

SeriesResult gml_series_detail(const MLSpec& spec, double x, const SeriesPolicy& policy) {
    return gml_series_scaled(spec, x, 0.0, policy);
}

double gml_series(const MLSpec& spec, double x, const SeriesPolicy& policy) {
    return gml_series_detail(spec, x, policy).value;
}

double ml_series(double alpha, double beta, double x, const SeriesPolicy& policy) {
    return gml_series({alpha, beta, 1.0}, x, policy);
}

SeriesResult wright_series_detail(double lambda, double beta, double x, const SeriesPolicy& policy) {
    if (!(lambda > -1.0) || !std::isfinite(lambda)) throw InvalidParam("Wright lambda must lie in (-1, inf)");
    if (!std::isfinite(beta) || !std::isfinite(x)) throw InvalidParam("Wright parameters must be finite");
    long double log_fact = 0.0L;
    int last_r = -1;
    auto coef = [&](int r) -> detail::LogSign {
        while (last_r < r - 1) {
            ++last_r;
            log_fact += std::log(static_cast<long double>(last_r + 1));
        }
        const detail::LogSign rg = detail::log_recip_gamma_l(static_cast<long double>(lambda) * r + beta);
        return {rg.log_abs - log_fact, rg.sign};
    };
    return detail::sum_log_series(x, 0.0, policy, coef, "Wright series");
}

double wright_series(double lambda, double beta, double x, const SeriesPolicy& policy, double max_cancellation) {
    const SeriesResult r = wright_series_detail(lambda, beta, x, policy);
    if (r.cancellation > max_cancellation) {
        std::ostringstream msg;
        msg << "Wright series lost " << std::log10(r.cancellation) << " digits to cancellation at x = " << x;
        throw CancellationWarning(msg.str(), r.cancellation);
    }
    return r.value;
}

}  // namespace fracpois
