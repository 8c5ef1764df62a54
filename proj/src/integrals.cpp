#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "fracpois/errors.hpp"
#include "fracpois/special_functions.hpp"
#include "series_internal.hpp"

namespace fracpois {
namespace {

constexpr double pi = std::numbers::pi;
constexpr double eps = std::numeric_limits<double>::epsilon();

void check_nu_open(double nu) {
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidParam("order must lie in (0, 1) for the integral representation");
}

void check_t(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParam("integral representations need finite t > 0");
}

// Integrate to the round-off floor; tolerances are fixed by the caller's scale.
QuadPolicy floor_policy(int max_subdivisions = 4000) {
    QuadPolicy q;
    q.abs_tol = std::numeric_limits<double>::min();
    q.rel_tol = 1e-15;
    q.max_subdivisions = max_subdivisions;
    return q;
}

double checked(const QuadResult& r, const char* what) {
    if (!r.converged && !(r.error <= 1e-9 * std::max(std::abs(r.value), 1e-300))) {
        std::ostringstream msg;
        msg << what << ": quadrature error estimate " << r.error << " for value " << r.value;
        throw QuadratureFailure(msg.str());
    }
    return r.value;
}

}  // namespace

namespace detail {

CutResult cut_integral_detail(const MLSpec& spec, double x, double power) {
    check_ml_spec(spec);
    const double nu = spec.alpha, beta = spec.beta, g = spec.gamma;
    check_nu_open(nu);
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidParam("contour route needs a finite argument x > 0");

    const long double lx = std::log(static_cast<long double>(x));
    const long double p = static_cast<long double>(nu) * g - beta;  // Laplace transform ~ s^p (s^nu + x)^-g

    // Small-s expansion coefficients c_j s^{q_j}, already multiplied by x^power.
    struct Coef {
        long double log_abs, q;
        int sign;
    };
    long double log_poch = 0.0L, log_fact = 0.0L;
    auto coef = [&](int j) {
        Coef c{(static_cast<long double>(power) - g - j) * lx + log_poch - log_fact, p + static_cast<long double>(nu) * j,
               j % 2 == 0 ? 1 : -1};
        log_poch += std::log(static_cast<long double>(g) + j);
        log_fact += std::log(static_cast<long double>(j + 1));
        return c;
    };

    CutResult out;
    long double total = 0.0L, bound = 0.0L;

    // Terms with q_j <= -1 are not integrable at the origin: invert them exactly.
    std::vector<Coef> singular;
    int j = 0;
    for (;; ++j) {
        Coef c = coef(j);
        if (c.q > -1.0L + 1e-12L) {
            // first regular term; keep it for the near-origin sum below
            singular.push_back(c);
            break;
        }
        const LogSign rg = log_recip_gamma_l(-c.q);
        if (rg.sign != 0) {
            const long double v = c.sign * rg.sign * std::exp(c.log_abs + rg.log_abs);
            total += v;
            bound += std::fabs(v);
        }
        singular.push_back(c);
    }
    const Coef first_regular = singular.back();
    singular.pop_back();

    // Near the origin the expansion converges: integrate it termwise against
    // e^{-rho} with incomplete gamma functions.
    // Successive terms there shrink by at least (g + j) / (j + 1) * rho^nu / x, so with
    // rho_s^nu = x / (2 max(g, 1)) no partial sum can swell beyond its first term.
    const long double rho_s = std::pow(static_cast<long double>(x) / (2.0L * std::max(1.0, g)), 1.0L / nu);
    {
        long double near = 0.0L, near_abs = 0.0L;
        int small_run = 0;
        Coef c = first_regular;
        for (int jj = j;; ++jj) {
            if (jj > j) c = coef(jj);
            const long double s = sin_pi(-c.q);
            const long double a = c.q + 1.0L;
            long double v = 0.0L;
            if (s != 0.0L) {
                // far past its mean the incomplete gamma ratio is 1 to working precision
                const bool complete = rho_s > a + 12.0L * std::sqrt(a) + 50.0L;
                const double pinc =
                    complete ? 1.0 : boost::math::gamma_p(static_cast<double>(a), static_cast<double>(rho_s));
                if (pinc > 0.0) v = c.sign * s * std::exp(c.log_abs + lgamma_pos(a) + std::log(static_cast<long double>(pinc))) / std::numbers::pi_v<long double>;
            }
            near += v;
            near_abs += std::fabs(v);
            const long double ref = std::fabs(near) + std::fabs(total) + 1e-300L;
            if (jj > j + 2 && jj > g + 2 && std::fabs(v) <= 1e-19L * ref) {
                if (++small_run >= 3) break;
            } else {
                small_run = 0;
            }
            if (jj - j > 100000) throw NonConvergence("contour route: origin expansion did not converge");
        }
        total += near;
        bound += near_abs;
    }

    // Far part: rho in [rho_s, R], the full transform minus the inverted singular terms.
    const double cn = std::cos(pi * nu), sn = std::sin(pi * nu);
    auto log_envelope = [&](double rho) {
        const double lr = std::log(rho);
        const double rn = std::exp(nu * lr);
        const double wr = x + rn * cn, wi = -rn * sn;
        return -rho + static_cast<double>(power * lx + p * lr) - g * std::log(std::hypot(wr, wi));
    };
    auto integrand = [&](double rho) {
        const double lr = std::log(rho);
        const double rn = std::exp(nu * lr);
        const double wr = x + rn * cn, wi = -rn * sn;
        const double logmag = -rho + static_cast<double>(power * lx + p * lr) - g * std::log(std::hypot(wr, wi));
        const double phase = -pi * static_cast<double>(p - 2.0L * std::floor(p / 2.0L)) - g * std::atan2(wi, wr);
        double v = std::exp(logmag) * std::sin(phase);
        for (const Coef& c : singular) {
            const double s = static_cast<double>(sin_pi(-c.q));
            if (s != 0.0) v -= c.sign * s * std::exp(static_cast<double>(c.log_abs + c.q * lr) - rho);
        }
        return v / pi;
    };

    const double rs = static_cast<double>(rho_s);
    double env_max = log_envelope(std::max(rs, 1e-300));
    double R = std::max({rs * 2.0, static_cast<double>(p) + 10.0, 10.0});
    for (double probe : {1.0, static_cast<double>(p), std::pow(x, 1.0 / nu)})
        if (probe > rs && probe < R) env_max = std::max(env_max, log_envelope(probe));
    const double scale_log = std::max(env_max, static_cast<double>(std::log(std::max(bound, 1e-300L))));
    while (log_envelope(R) > scale_log - 46.0) R *= 1.5;

    if (rs < R) {
        std::vector<double> breaks{1.0, std::pow(x, 1.0 / nu), std::pow(x * std::abs(cn), 1.0 / nu)};
        if (p > 0) breaks.push_back(static_cast<double>(p));
        for (double b = rs * 2.0; b < R; b *= 2.0) breaks.push_back(b);
        const QuadResult q = integrate(integrand, rs, R, floor_policy(), breaks);
        total += checked(q, "Mittag-Leffler contour integral");
        bound += q.abs_integral;
    }
    out.value = static_cast<double>(total);
    out.abs_bound = static_cast<double>(bound);
    return out;
}

HankelResult wright_hankel_detail(double nu, double beta, double x) {
    check_nu_open(nu);
    if (!(beta < 1.0)) throw InvalidParam("Hankel route for W_{-nu,beta} needs beta < 1");
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidParam("Hankel route needs finite x >= 0");
    const double cn = std::cos(pi * nu), sn = std::sin(pi * nu);
    const bool substitute = beta > 0.0;
    const double expo = substitute ? 1.0 / (1.0 - beta) : 1.0;
    // rho = u^expo removes the rho^-beta singularity; the Jacobian leaves 1/(1 - beta)
    auto rho_of = [&](double u) { return substitute ? std::pow(u, expo) : u; };
    auto integrand = [&](double u) {
        const double rho = rho_of(u);
        const double rn = std::pow(rho, nu);
        const double lead = substitute ? 1.0 / (1.0 - beta) : std::pow(rho, -beta);
        return lead * std::exp(-rho - x * rn * cn) * std::sin(pi * beta + x * rn * sn) / pi;
    };
    auto log_env = [&](double rho) { return -rho - x * std::pow(rho, nu) * cn; };
    // peak of the envelope when cos(pi nu) < 0
    double rho_peak = 0.0;
    if (cn < 0.0) rho_peak = std::pow(nu * x * (-cn), 1.0 / (1.0 - nu));
    const double env_max = std::max(0.0, log_env(std::max(rho_peak, 1e-300)));
    double R = std::max(10.0, 2.0 * rho_peak + 10.0);
    while (log_env(R) > env_max - 46.0) R *= 1.5;
    const double U = substitute ? std::pow(R, 1.0 - beta) : R;
    std::vector<double> breaks;
    for (double r : {0.1, 1.0, rho_peak, 2.0 * rho_peak})
        if (r > 0.0) breaks.push_back(substitute ? std::pow(r, 1.0 - beta) : r);
    // one break per half oscillation keeps the adaptive pass from aliasing
    if (x * sn > 0.0) {
        const double turns = x * std::pow(R, nu) * sn / pi;
        const int n = static_cast<int>(std::min(turns, 2000.0));
        for (int i = 1; i <= n; ++i) {
            const double rho = std::pow(i * pi / (x * sn), 1.0 / nu);
            if (rho < R) breaks.push_back(substitute ? std::pow(rho, 1.0 - beta) : rho);
        }
    }
    const QuadResult q = integrate(integrand, 0.0, U, floor_policy(8000), breaks);
    return {checked(q, "Wright Hankel integral"), q.abs_integral};
}

HankelResult wright_saddle_detail(double nu, double beta, double x) {
    check_nu_open(nu);
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidParam("Wright contour route needs finite x >= 0");
    // Talbot-shaped contour s(th) = r (th cot th + i th) through the real saddle of
    // s - x s^nu, where the integrand is no larger than the result itself.
    const double saddle = std::pow(nu * x, 1.0 / (1.0 - nu));
    const double r = std::max(saddle, 1.0);
    using cd = std::complex<double>;
    auto integrand = [=](double th) {
        if (th >= pi) return 0.0;
        cd s, ds;
        if (th < 1e-4) {
            s = cd(r * (1.0 - th * th / 3.0), r * th);
            ds = cd(r * (-2.0 * th / 3.0), r);
        } else {
            const double sn = std::sin(th), ct = std::cos(th) / sn;
            s = cd(r * th * ct, r * th);
            ds = cd(r * (ct - th / (sn * sn)), r);
        }
        const cd ls = std::log(s);
        const cd f = std::exp(s - x * std::exp(nu * ls) - beta * ls) * ds;
        return f.imag() / pi;
    };
    const std::vector<double> breaks{0.5, 1.0, 2.0, 2.5, 3.0};
    const QuadResult q = integrate(integrand, 0.0, pi, floor_policy(), breaks);
    return {checked(q, "Wright saddle contour"), q.abs_integral};
}

namespace {

struct TalbotIntegrand {
    double nu, a, g, x, lx, r;

    // Im[e^s F(s) s'(th)] / pi with F(s) = s^a (s^nu + x)^{-g} x^power
    double operator()(double th) const {
        using cd = std::complex<double>;
        if (th >= pi) return 0.0;
        cd s, ds;
        if (th < 1e-4) {
            s = cd(r * (1.0 - th * th / 3.0), r * th);
            ds = cd(r * (-2.0 * th / 3.0), r);
        } else {
            const double sn = std::sin(th), ct = std::cos(th) / sn;
            s = cd(r * th * ct, r * th);
            ds = cd(r * (ct - th / (sn * sn)), r);
        }
        if (s.real() < -750.0) return 0.0;
        const cd ls = std::log(s);
        const cd lf = s + a * ls - g * std::log(std::exp(nu * ls) + x) + lx;
        return (std::exp(lf) * ds).imag() / pi;
    }
};

// Coarse trapezoid estimate of the integral of |integrand|: the quantity the radius should minimise.
double talbot_mass(const TalbotIntegrand& f) {
    constexpr int n = 64;
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += std::abs(f((i + 0.5) * pi / n));
    return m * pi / n;
}

}  // namespace

double talbot_radius(const MLSpec& spec, double x) {
    const double nu = spec.alpha, a = spec.alpha * spec.gamma - spec.beta, g = spec.gamma;
    // Interior minimum of log|integrand| on the positive axis, if there is one, is the saddle.
    auto phi = [&](double ls) { return std::exp(ls) + a * ls - g * std::log(std::exp(nu * ls) + x); };
    const double hi = std::max(0.0, std::log(x) / nu) + std::log(g + 2.0) + 3.0;
    constexpr double h = 0.2;
    double f0 = phi(-8.0), f1 = phi(-8.0 + h), best = std::numeric_limits<double>::infinity(), at = 0.0;
    bool found = false;
    for (double ls = -8.0 + h; ls <= hi; ls += h) {
        const double f2 = phi(ls + h);
        if (f1 <= f0 && f1 <= f2 && f1 < best) {
            best = f1;
            at = ls;
            found = true;
        }
        f0 = f1;
        f1 = f2;
    }
    if (found) return std::exp(at);
    // No saddle: scan radii for the smallest absolute mass along the contour.
    TalbotIntegrand f{nu, a, g, x, 0.0, 1.0};
    double best_mass = std::numeric_limits<double>::infinity(), best_r = 1.0;
    for (double lr = -4.0; lr <= hi; lr += 0.35) {
        f.r = std::exp(lr);
        const double m = talbot_mass(f);
        if (m < best_mass) {
            best_mass = m;
            best_r = f.r;
        }
    }
    return best_r;
}

CutResult talbot_detail(const MLSpec& spec, double x, double power, double r) {
    check_ml_spec(spec);
    if (!(x > 0.0)) throw InvalidParam("contour route needs x > 0");
    if (r <= 0.0) r = talbot_radius(spec, x);
    // Bromwich integral of e^s s^{nu g - b} (s^nu + x)^{-g}.  Off the negative axis there are
    // no singularities, so the contour can keep clear of the near-pole at |s| = x^{1/nu}.
    const TalbotIntegrand f{spec.alpha, spec.alpha * spec.gamma - spec.beta, spec.gamma, x,
                            power * std::log(x), r};
    const std::vector<double> breaks{0.5, 1.0, 2.0, 2.5, 3.0};
    const QuadResult q = integrate(f, 0.0, pi, floor_policy(), breaks);
    return {checked(q, "Talbot contour"), q.abs_integral};
}

}  // namespace detail

double gml_cut_integral(const MLSpec& spec, double x, double power) {
    return detail::cut_integral_detail(spec, x, power).value;
}

double wright_hankel_integral(double nu, double beta, double x) {
    return detail::wright_hankel_detail(nu, beta, x).value;
}

double ml_neg_integral(double nu, double t, const QuadPolicy& policy) {
    check_nu_open(nu);
    check_t(t);
    const double sn = std::sin(pi * nu), cn = std::cos(pi * nu);
    auto kernel = [=](double r) {
        const double rn = std::pow(r, nu);
        return std::exp(-r * t) / (rn * rn + 2.0 * rn * cn + 1.0);
    };
    // [0, 1]: r = u^{1/nu} absorbs r^{nu-1}; [1, R]: plain
    auto head = [&](double u) { return kernel(std::pow(u, 1.0 / nu)) / nu; };
    auto tail = [&](double r) { return std::pow(r, nu - 1.0) * kernel(r); };
    const double R = std::max(2.0, tail_cutoff(t, policy.abs_tol));
    std::vector<double> breaks{std::pow(std::abs(cn), 1.0 / nu), 10.0, 100.0, 1.0 / t, 10.0 / t};
    const double a = integrate_checked(head, 0.0, 1.0, policy, std::vector<double>{std::abs(cn)});
    const double b = integrate_checked(tail, 1.0, R, policy, breaks);
    return sn / pi * (a + b);
}

double ml_neg_cauchy_mean(double nu, double t, const QuadPolicy& policy) {
    check_nu_open(nu);
    check_t(t);
    const double sn = std::sin(pi * nu), cn = std::cos(pi * nu);
    const double lo = pi / 2.0 - nu * pi;
    auto f = [=](double theta) {
        const double X = sn * std::tan(theta) - cn;
        if (X <= 0.0) return 1.0;
        return std::exp(-t * std::pow(X, 1.0 / nu));
    };
    // resolve the drop from 1 to 0, which sits where t X^{1/nu} ~ 1
    std::vector<double> breaks;
    for (double m : {0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double X = std::pow(m / t, nu);
        breaks.push_back(std::atan((X + cn) / sn));
    }
    return integrate_checked(f, lo, pi / 2.0, policy, breaks) / (pi * nu);
}

double ml2_neg_integral(double nu, double beta, double t, const QuadPolicy& policy) {
    check_nu_open(nu);
    check_t(t);
    if (!(beta > 0.0 && beta < nu + 1.0))
        throw InvalidParam("two-parameter integral form needs 0 < beta < nu + 1");
    const double cn = std::cos(pi * nu);
    const double sb = std::sin(pi * beta), sbn = std::sin(pi * (beta - nu));
    auto kernel = [=](double r) {
        const double rn = std::pow(r, nu);
        return std::exp(-r * t) * (rn * sb + sbn) / (rn * rn + 2.0 * rn * cn + 1.0);
    };
    const double e = nu - beta + 1.0;  // r^{nu-beta} dr = du / e with r = u^{1/e}
    auto head = [&](double u) { return kernel(std::pow(u, 1.0 / e)) / e; };
    auto tail = [&](double r) { return std::pow(r, nu - beta) * kernel(r); };
    const double R = std::max(2.0, tail_cutoff(t, policy.abs_tol));
    std::vector<double> breaks{std::pow(std::abs(cn), 1.0 / nu), 10.0, 100.0, 1.0 / t, 10.0 / t};
    const double a = integrate_checked(head, 0.0, 1.0, policy, std::vector<double>{std::pow(std::abs(cn), e / nu)});
    const double b = integrate_checked(tail, 1.0, R, policy, breaks);
    return std::pow(t, 1.0 - beta) / pi * (a + b);
}

double ml_nu_nu_neg_integral(double nu, double t, const QuadPolicy& policy) {
    check_nu_open(nu);
    check_t(t);
    const double sn = std::sin(pi * nu), cn = std::cos(pi * nu);
    auto f = [=](double r) {
        const double rn = std::pow(r, nu);
        return rn * std::exp(-r * t) * sn / ((rn + cn) * (rn + cn) + sn * sn);
    };
    const double R = std::max(2.0, tail_cutoff(t, policy.abs_tol));
    std::vector<double> breaks{1e-6, 1e-3, std::pow(std::abs(cn), 1.0 / nu), 1.0, 10.0, 1.0 / t, 10.0 / t};
    return std::pow(t, 1.0 - nu) / pi * integrate_checked(f, 0.0, R, policy, breaks);
}

double ml_large_t_approx(double nu, double beta, double t) {
    check_nu_open(nu);
    check_t(t);
    if (beta == nu) return std::tgamma(nu + 1.0) * std::sin(nu * pi) / (pi * std::pow(t, 2.0 * nu));
    // Gamma(nu - beta + 1) sin((beta - nu) pi) / pi = 1 / Gamma(beta - nu)
    const LogRecipGamma rg = log_recip_gamma(beta - nu);
    return rg.sign * std::exp(rg.log_abs) / std::pow(t, nu);
}

double wright_neg_integral(double nu, double beta, double t, const QuadPolicy& policy) {
    if (!(nu > 0.0 && nu <= 0.5))
        throw InvalidParam("negative-axis Wright integral is only convergent for 0 < nu <= 1/2");
    check_t(t);
    if (nu == 0.5 && !(beta < 1.0)) throw InvalidParam("at nu = 1/2 the Wright integral needs beta < 1");
    const double cn = std::cos(pi * nu), sn = std::sin(pi * nu);
    const double m = (beta - 1.0) / nu - 1.0;
    // v = r^{-nu}: the essential singularity at r = 0 becomes a decaying tail in v
    auto amp = [=](double v) { return std::exp(-t * std::pow(v, -1.0 / nu) - cn * v + m * std::log(v)) / nu; };
    auto f = [&](double v) { return v <= 0.0 ? 0.0 : amp(v) * std::sin(pi * beta - sn * v); };

    double V;
    double tail = 0.0;
    if (nu < 0.5) {
        // stop where the amplitude has fallen far below its peak
        double peak = 0.0;
        for (double v = 1e-3; v < 1e7; v *= 1.2) peak = std::max(peak, amp(v));
        V = 1.0;
        while (amp(V) > 1e-18 * peak || V < 10.0) V *= 1.2;
    } else {
        // undamped oscillation: integrate by parts past V for the remainder
        V = 4000.0;
        const double a = amp(V);
        const double da = a * (t / nu * std::pow(V, -1.0 / nu - 1.0) - cn + m / V);
        const double ph = pi * beta - V;
        tail = -a * std::cos(ph) - da * std::sin(ph);
    }
    std::vector<double> breaks;
    for (double v = pi / sn; v < V; v += 2.0 * pi / sn) breaks.push_back(v);
    for (double v : {0.01, 0.1, 1.0}) breaks.push_back(v);
    QuadPolicy q = policy;
    q.max_subdivisions = std::max(q.max_subdivisions, 4 * static_cast<int>(breaks.size()) + 100);
    const double body = integrate_checked(f, 0.0, V, q, breaks);
    return std::pow(t, 1.0 - beta) / pi * (body + tail);
}

}  // namespace fracpois
