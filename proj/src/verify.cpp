#include "fracpois/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fracpois/errors.hpp"

namespace fracpois {
namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double binomial(int n, int j) {
    double c = 1.0;
    for (int i = 1; i <= j; ++i) c = c * (n - j + i) / i;
    return c;
}

// quadrature settings for the checks: tight enough that the quadrature error
// sits far below the 1e-6 .. 1e-7 tolerances being tested
QuadPolicy check_policy(const QuadPolicy& p) {
    QuadPolicy q = p;
    q.abs_tol = std::min(q.abs_tol, 1e-12);
    return q;
}

}  // namespace

void GridSpec::validate() const {
    if (!(t_min > 0.0 && t_min < t_max) || !std::isfinite(t_max))
        throw InvalidParam("grid needs 0 < t_min < t_max");
    if (points < 2) throw InvalidParam("grid needs at least two points");
}

std::vector<double> GridSpec::nodes() const {
    validate();
    std::vector<double> t(points);
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        t[i] = spacing == Spacing::linear ? t_min + f * (t_max - t_min)
                                          : t_min * std::pow(t_max / t_min, f);
    }
    t.back() = t_max;
    return t;
}

double laplace_forward(const Integrand& f, double s, const QuadPolicy& policy, const LaplaceOptions& options) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidParam("Laplace variable must be positive");
    if (!(options.origin_exponent > 0.0)) throw InvalidParam("origin exponent must be positive");
    const double rate = s - options.growth_rate;
    if (!(rate > 0.0)) throw InvalidParam("Laplace variable must exceed the growth rate of f");

    const double head = 1.0 / rate;
    double total = 0.0;
    if (options.origin_exponent < 1.0) {
        const double p = 1.0 / options.origin_exponent;
        auto g = [&](double u) {
            const double t = std::pow(u, p);
            return std::exp(-s * t) * f(t) * p * std::pow(u, p - 1.0);
        };
        total += integrate_checked(g, 0.0, std::pow(head, options.origin_exponent), policy);
    } else {
        total += integrate_checked([&](double t) { return std::exp(-s * t) * f(t); }, 0.0, head, policy);
    }
    // slack for polynomial growth on top of the exponential envelope
    const double end = head + tail_cutoff(rate, policy.abs_tol * 1e-6);
    std::vector<double> breaks;
    for (double b = 2.0 * head; b < end; b *= 2.0) breaks.push_back(b);
    total += integrate_checked([&](double t) { return std::exp(-s * t) * f(t); }, head, end, policy, breaks);
    return total;
}

CheckReport gml_laplace_pair(const MLSpec& spec, double w, double s, double tol) {
    const double b = spec.alpha, c = spec.beta, d = spec.gamma;
    const double growth = w > 0.0 ? std::pow(w, 1.0 / b) : 0.0;
    if (!(s > growth)) throw InvalidParam("Laplace pair needs s > w^{1/b}");
    auto f = [&](double t) { return std::pow(t, c - 1.0) * gml(spec, w * std::pow(t, b)); };
    const double lhs = laplace_forward(f, s, check_policy({}), {std::min({c, b, 1.0}), growth});
    const double rhs = std::pow(s, b * d - c) / std::pow(std::pow(s, b) - w, d);
    return CheckReport::compare("laplace-gml-pair", lhs, rhs, tol,
                                "b=" + fmt(b) + " c=" + fmt(c) + " delta=" + fmt(d) + " w=" + fmt(w) + " s=" + fmt(s));
}

std::vector<CheckReport> verify_transform_pairs(const ProcessSpec& spec, std::span<const double> s_grid, double tol) {
    spec.validate();
    const int n = spec.n;
    const double nu = spec.nu, lam = spec.lambda;
    const QuadPolicy q = check_policy({});
    const std::string tag = " n=" + std::to_string(n) + " nu=" + fmt(nu) + " lambda=" + fmt(lam);
    std::vector<CheckReport> out;

    auto add = [&](const std::string& name, const Integrand& f, double c, auto transform, const std::string& extra) {
        for (double s : s_grid) {
            const double lhs = laplace_forward(f, s, q, {c, 0.0});
            out.push_back(CheckReport::compare(name, lhs, transform(s), tol, extra + tag + " s=" + fmt(s)));
        }
    };

    // pmf: sum_{j=1}^n C(n,j) s^{nu j - 1} lambda^{(k+1)n - j} / (s^nu + lambda)^{(k+1)n}
    for (int k = 0; k <= 2; ++k) {
        auto transform = [=](double s) {
            const double sn = std::pow(s, nu);
            double num = 0.0;
            for (int j = 1; j <= n; ++j) num += binomial(n, j) * std::pow(s, nu * j - 1.0) * std::pow(lam, (k + 1) * n - j);
            return num / std::pow(sn + lam, (k + 1) * n);
        };
        add("laplace-pmf", [&, k](double t) { return pmf(spec, k, t); }, nu, transform, "k=" + std::to_string(k));
    }

    // k-th event time density: (lambda / (s^nu + lambda))^{nk}
    for (int k = 1; k <= 3; ++k) {
        auto transform = [=](double s) { return std::pow(lam / (std::pow(s, nu) + lam), n * k); };
        add(k == 1 ? "laplace-interarrival" : "laplace-waiting-time",
            [&, k](double t) { return waiting_time_pdf(spec, k, t); }, std::min(n * k * nu, 1.0), transform,
            "k=" + std::to_string(k));
    }

    // renewal function: lambda s^{-nu-1} (n = 1) and lambda^2 s^{-nu-1} / (s^nu + 2 lambda) (n = 2)
    if (n <= 2) {
        auto transform = [=](double s) {
            const double base = std::pow(s, -nu - 1.0);
            return n == 1 ? lam * base : lam * lam * base / (std::pow(s, nu) + 2.0 * lam);
        };
        add("laplace-renewal", [&](double t) { return renewal_mean(spec, t); }, nu, transform, "");
    }
    return out;
}

namespace {

// (scale^k / k!) int_0^inf e^{-rate z} z^k M_nu(z) dz; the scale sits inside the
// integrand so the quadrature tolerance applies to the quantity returned
double kernel_moment(int k, double nu, double rate, double scale, const QuadPolicy& policy) {
    if (k < 0) throw InvalidParam("moment index must be >= 0");
    if (!(nu > 0.0 && nu < 1.0)) throw InvalidParam("M-Wright kernel needs 0 < nu < 1");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidParam("decay rate must be positive");
    const double log_kfact = std::lgamma(k + 1.0);
    auto kernel = [nu](double z) {
        if (nu == 0.5) return std::exp(-0.25 * z * z) / std::sqrt(pi);
        return m_wright(nu, z);
    };
    auto f = [&](double z) {
        if (z <= 0.0) return k == 0 ? kernel(0.0) : 0.0;
        const double lw = -rate * z + k * std::log(scale * z) - log_kfact;
        return lw < -745.0 ? 0.0 : std::exp(lw) * kernel(z);
    };
    const QuadPolicy q = check_policy(policy);
    // the kernel's own scale is 1: [0, 1] directly, the tail through z = 1 + u / (1 - u)
    const double near = integrate_checked(f, 0.0, 1.0, q);
    auto tail = [&](double u) {
        const double d = 1.0 - u;
        return f(1.0 + u / d) / (d * d);
    };
    const double far = integrate_checked(tail, 0.0, 1.0, q);
    return near + far;
}

}  // namespace

double m_wright_laplace_moment(int k, double nu, double rate, const QuadPolicy& policy) {
    return kernel_moment(k, nu, rate, 1.0, policy);
}

double subordination_pmf(int k, double nu, double lambda, double t, const QuadPolicy& policy) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParam("lambda must be positive");
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParam("time must be positive");
    const double c = lambda * std::pow(t, nu);
    // y = c z turns the scaled kernel into the unit one
    return kernel_moment(k, nu, c, c, policy);
}

CheckReport gml_laplace_identity(int k, double nu, double lambda, double tol, const QuadPolicy& policy) {
    const double lhs = m_wright_laplace_moment(k, nu, lambda, policy);
    const double rhs = gml({nu, nu * k + 1.0, k + 1.0}, -lambda);
    return CheckReport::compare("gml-laplace-identity", lhs, rhs, tol,
                                "k=" + std::to_string(k) + " nu=" + fmt(nu) + " lambda=" + fmt(lambda));
}

namespace {

// h^m f^(m) from the centred stencil around node i (averaged over two for odd m)
double central_difference(std::span<const double> f, int i, int m) {
    auto even = [&](int centre2) {  // centre2 = twice the centre index
        double acc = 0.0;
        for (int l = 0; l <= m; ++l) {
            const int idx = (centre2 + m) / 2 - l;
            acc += ((l % 2) ? -1.0 : 1.0) * binomial(m, l) * f[idx];
        }
        return acc;
    };
    if (m % 2 == 0) return even(2 * i);
    return 0.5 * (even(2 * i + 1) + even(2 * i - 1));
}

// Caputo derivative of order a at nodes first .. nodes-1 from f_j = f(j h).
// Integer a: centred differences.  Otherwise the L1 scheme gives the derivative
// of order a - (m - 1) in (0, 1), and centred differences of order m - 1 finish
// the job.  The two commute because f^(j)(0) = 0 for 1 <= j < m, which holds
// for every pmf of the family.
std::vector<double> caputo_on_grid(std::span<const double> f, int nodes, int first, double h, double a) {
    std::vector<double> d(nodes, 0.0);
    const int m = static_cast<int>(std::ceil(a - 1e-12));
    if (std::abs(a - std::round(a)) < 1e-12) {
        for (int i = first; i < nodes; ++i) d[i] = central_difference(f, i, m) / std::pow(h, m);
        return d;
    }
    const int q = m - 1;
    const double frac = a - q;
    const int len = static_cast<int>(f.size());
    std::vector<double> w(len);
    for (int r = 0; r < len; ++r) w[r] = std::pow(r + 1.0, 1.0 - frac) - std::pow(static_cast<double>(r), 1.0 - frac);
    const double scale = std::pow(h, -frac) / std::tgamma(2.0 - frac);
    std::vector<double> l1(len, 0.0);
    for (int i = std::max(first - 2, 1); i < len; ++i) {
        double acc = 0.0;
        for (int j = 0; j < i; ++j) acc += w[i - j - 1] * (f[j + 1] - f[j]);
        l1[i] = scale * acc;
    }
    for (int i = first; i < nodes; ++i) d[i] = q == 0 ? l1[i] : central_difference(l1, i, q) / std::pow(h, q);
    return d;
}

}  // namespace

double caputo_residual_at(const ProcessSpec& spec, int k, const GridSpec& grid) {
    spec.validate();
    grid.validate();
    if (k < 0) throw InvalidParam("k must be >= 0");
    if (grid.spacing != GridSpec::Spacing::linear) throw InvalidParam("Caputo residual needs a linear grid");
    const int steps = grid.points - 1;
    const double h = grid.t_max / steps;
    const int first = static_cast<int>(std::ceil(grid.t_min / h - 1e-9));
    if (first < 4) throw StepTooCoarse("step " + fmt(h) + " does not resolve the window start " + fmt(grid.t_min));

    const int n = spec.n;
    const int m_max = static_cast<int>(std::ceil(n * spec.nu - 1e-12));
    const int nodes = steps + 1;
    // centred stencils near t_max reach past the grid
    std::vector<double> p(nodes + m_max + 2), prev(nodes, 0.0);
    for (std::size_t j = 0; j < p.size(); ++j) p[j] = pmf(spec, k, j * h);
    if (k > 0)
        for (int j = first; j < nodes; ++j) prev[j] = pmf(spec, k - 1, j * h);

    std::vector<double> lhs(nodes, 0.0);
    for (int j = 1; j <= n; ++j) {
        const double coeff = binomial(n, j) * std::pow(spec.lambda, n - j);
        const std::vector<double> d = caputo_on_grid(p, nodes, first, h, j * spec.nu);
        for (int i = first; i < nodes; ++i) lhs[i] += coeff * d[i];
    }
    const double lam_n = std::pow(spec.lambda, n);
    double worst = 0.0;
    for (int i = first; i < nodes; ++i) worst = std::max(worst, std::abs(lhs[i] + lam_n * (p[i] - prev[i])));
    return worst;
}

CheckReport caputo_residual(const ProcessSpec& spec, int k, const GridSpec& grid, int halvings, double max_ratio) {
    if (halvings < 1) throw InvalidParam("need at least one halving");
    std::vector<double> res;
    GridSpec g = grid;
    for (int i = 0; i <= halvings; ++i) {
        res.push_back(caputo_residual_at(spec, k, g));
        g.points = 2 * (g.points - 1) + 1;
    }
    std::string detail = "n=" + std::to_string(spec.n) + " nu=" + fmt(spec.nu) + " k=" + std::to_string(k) +
                         " residuals";
    for (double r : res) detail += " " + fmt(r);
    for (double r : res)
        if (!std::isfinite(r)) throw StepTooCoarse("non-finite residual: " + detail);
    double worst = 0.0;
    for (std::size_t i = 1; i < res.size(); ++i) {
        // both at rounding level: nothing left to refine
        if (res[i - 1] < 1e-12 && res[i] < 1e-12) continue;
        worst = std::max(worst, res[i] / res[i - 1]);
    }
    return CheckReport::compare("caputo-residual-refinement", worst, 0.0, max_ratio, detail);
}

CheckReport factorial_moment_check(const ProcessSpec& spec, int r, double t, double tol) {
    const double exact = factorial_moment(spec, r, t);
    const int cut = normalization_cutoff(spec, t, 1e-17);
    double sum = 0.0;
    // the falling factorial weights the tail, so run well past the mass cutoff
    for (int k = r; k <= 2 * cut + 20; ++k) {
        double w = 1.0;
        for (int i = 0; i < r; ++i) w *= k - i;
        sum += w * pmf(spec, k, t);
    }
    return CheckReport::compare("factorial-moment", sum, exact, tol,
                                "r=" + std::to_string(r) + " nu=" + fmt(spec.nu) + " t=" + fmt(t));
}

}  // namespace fracpois
