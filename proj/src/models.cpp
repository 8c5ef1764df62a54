#include "fracpois/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "fracpois/errors.hpp"

namespace fracpois {
namespace {

// x^power * E^gamma_{nu,beta}(-x).  Probabilities need absolute accuracy: a huge
// amplification only matters when the resulting error is visible at that scale.
double scaled(double nu, double beta, double gamma, double x, double power, const SeriesPolicy& policy) {
    const Evaluation e = gml_neg_scaled({nu, beta, gamma}, x, power, policy);
    const double err = std::abs(e.value) * e.cancellation * std::numeric_limits<double>::epsilon();
    if (err > 1e-9 && e.cancellation > 1e8)
        throw NumericalInstability("Mittag-Leffler evaluation lost too many digits (amplification " +
                                   std::to_string(e.cancellation) + ")");
    return e.value;
}

double binomial(int n, int j) {
    double c = 1.0;
    for (int i = 1; i <= j; ++i) c = c * (n - j + i) / i;
    return c;
}

// Rounding can push a probability a hair outside [0, 1]; anything further is a bug upstream.
double as_probability(double p) {
    if (!(p > -1e-9 && p < 1.0 + 1e-9))
        throw NumericalInstability("probability evaluated outside [0, 1]: " + std::to_string(p));
    return std::clamp(p, 0.0, 1.0);
}

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParam("time must be finite and nonnegative");
}

void check_positive_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw InvalidParam("time must be finite and positive");
}

double intensity(const ProcessSpec& s, double t) { return s.lambda * std::pow(t, s.nu); }

void require_order(const ProcessSpec& s, int max_n, const char* what) {
    if (s.n > max_n) throw InvalidParam(std::string(what) + " is only available for n <= " + std::to_string(max_n));
}

}  // namespace

CheckReport CheckReport::compare(std::string name, double lhs, double rhs, double tol, std::string detail) {
    CheckReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_err = std::abs(lhs - rhs);
    // rhs is the reference value
    r.rel_err = rhs != 0.0 ? r.abs_err / std::abs(rhs)
                           : (r.abs_err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.tol = tol;
    r.pass = r.abs_err <= tol || r.rel_err <= tol;
    r.detail = std::move(detail);
    return r;
}

void ProcessSpec::validate() const {
    if (n < 1) throw InvalidParam("model order n must be >= 1");
    if (!(nu > 0.0 && nu <= 1.0)) throw InvalidParam("nu must lie in (0, 1]");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParam("lambda must be positive and finite");
}

double pmf(const ProcessSpec& spec, int k, double t, const SeriesPolicy& policy) {
    spec.validate();
    check_time(t);
    if (k < 0) throw InvalidParam("event count must be >= 0");
    if (t == 0.0) return k == 0 ? 1.0 : 0.0;
    const double x = intensity(spec, t);
    const double nu = spec.nu;
    if (spec.n == 1) return as_probability(scaled(nu, nu * k + 1.0, k + 1.0, x, k, policy));
    if (spec.n == 2) {
        const double even = scaled(nu, 2.0 * k * nu + 1.0, 2.0 * k + 1.0, x, 2.0 * k, policy);
        const double odd = scaled(nu, (2.0 * k + 1.0) * nu + 1.0, 2.0 * k + 2.0, x, 2.0 * k + 1.0, policy);
        return as_probability(even + odd);
    }
    const int n = spec.n;
    const double g = static_cast<double>(n) * (k + 1);
    double sum = 0.0;
    for (int j = 1; j <= n; ++j) {
        const double a = g - j;
        sum += binomial(n, j) * scaled(nu, nu * a + 1.0, g, x, a, policy);
    }
    return as_probability(sum);
}

std::vector<double> pmf_table(const ProcessSpec& spec, int k_max, double t, const SeriesPolicy& policy) {
    if (k_max < 0) throw InvalidParam("k_max must be >= 0");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) out.push_back(pmf(spec, k, t, policy));
    return out;
}

int normalization_cutoff(const ProcessSpec& spec, double t, double tail_tol, const SeriesPolicy& policy) {
    spec.validate();
    check_time(t);
    if (!(tail_tol > 0.0)) throw InvalidParam("tail tolerance must be positive");
    if (t == 0.0) return 0;
    auto small_tail = [&](int K) { return waiting_time_cdf(spec, K + 1, t, policy) < tail_tol; };
    constexpr int cap = 1 << 20;
    if (small_tail(0)) return 0;
    int lo = 0, hi = 1;
    while (!small_tail(hi)) {
        lo = hi;
        if (hi >= cap) throw NonConvergence("pmf tail does not fall below tolerance within 2^20 terms");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (small_tail(mid) ? hi : lo) = mid;
    }
    return hi;
}

CheckReport pmf_decomposition_check(const ProcessSpec& spec, int k, double t, double tol,
                                    const SeriesPolicy& policy) {
    spec.validate();
    if (spec.n < 2) throw InvalidParam("decomposition check needs n >= 2");
    const ProcessSpec first{1, spec.nu, spec.lambda};
    double sum = 0.0;
    for (int j = 0; j < spec.n; ++j) sum += pmf(first, spec.n * k + j, t, policy);
    return CheckReport::compare("pmf-decomposition", pmf(spec, k, t, policy), sum, tol,
                                "n=" + std::to_string(spec.n) + " k=" + std::to_string(k));
}

double waiting_time_pdf(const ProcessSpec& spec, int k, double t, const SeriesPolicy& policy) {
    spec.validate();
    check_positive_time(t);
    if (k < 1) throw InvalidParam("waiting time index must be >= 1");
    const double m = static_cast<double>(spec.n) * k;
    const double v = scaled(spec.nu, spec.nu * m, m, intensity(spec, t), m, policy) / t;
    return std::max(v, 0.0);
}

double waiting_time_cdf(const ProcessSpec& spec, int k, double t, const SeriesPolicy& policy) {
    spec.validate();
    check_time(t);
    if (k < 1) throw InvalidParam("waiting time index must be >= 1");
    if (t == 0.0) return 0.0;
    const double m = static_cast<double>(spec.n) * k;
    return as_probability(scaled(spec.nu, spec.nu * m + 1.0, m, intensity(spec, t), m, policy));
}

double interarrival_pdf(const ProcessSpec& spec, double t, const SeriesPolicy& policy) {
    return waiting_time_pdf(spec, 1, t, policy);
}

TailAsymptote interarrival_tail_asymptote(const ProcessSpec& spec, double t) {
    spec.validate();
    check_positive_time(t);
    TailAsymptote a;
    a.extrapolated = spec.n > 2;
    if (spec.nu == 1.0) {
        a.applicable = false;
        return a;
    }
    a.value = spec.n * spec.nu / (spec.lambda * std::tgamma(1.0 - spec.nu) * std::pow(t, spec.nu + 1.0));
    return a;
}

double pgf(const ProcessSpec& spec, double u, double t, const SeriesPolicy& policy) {
    spec.validate();
    require_order(spec, 2, "pgf");
    check_time(t);
    if (!(u >= 1e-12 && u <= 1.0)) throw InvalidParam("pgf argument u must lie in [1e-12, 1]");
    const double x = intensity(spec, t);
    if (spec.n == 1) return scaled(spec.nu, 1.0, 1.0, x * (1.0 - u), 0.0, policy);
    const double r = std::sqrt(u);
    const double near = scaled(spec.nu, 1.0, 1.0, x * (1.0 - r), 0.0, policy);
    const double far = scaled(spec.nu, 1.0, 1.0, x * (1.0 + r), 0.0, policy);
    return ((r + 1.0) * near + (r - 1.0) * far) / (2.0 * r);
}

double factorial_moment(const ProcessSpec& spec, int r, double t) {
    spec.validate();
    require_order(spec, 1, "factorial_moment");
    check_time(t);
    if (r < 1) throw InvalidParam("moment order must be >= 1");
    if (t == 0.0) return 0.0;
    return std::exp(r * std::log(intensity(spec, t)) + std::lgamma(r + 1.0) - std::lgamma(spec.nu * r + 1.0));
}

double renewal_mean(const ProcessSpec& spec, double t, const SeriesPolicy& policy) {
    spec.validate();
    require_order(spec, 2, "renewal_mean");
    check_time(t);
    if (t == 0.0) return 0.0;
    const double x = intensity(spec, t);
    if (spec.n == 1) return x / std::tgamma(spec.nu + 1.0);
    // x^2 E_{nu,2nu+1}(-2x) = (2x)^2 E_{nu,2nu+1}(-2x) / 4
    return scaled(spec.nu, 2.0 * spec.nu + 1.0, 1.0, 2.0 * x, 2.0, policy) / 4.0;
}

double renewal_mean_from_first_order(const ProcessSpec& spec, double t, const SeriesPolicy& policy) {
    spec.validate();
    if (spec.n != 2) throw InvalidParam("first-order rewrite applies to n = 2");
    check_time(t);
    if (t == 0.0) return 0.0;
    const ProcessSpec first{1, spec.nu, spec.lambda};
    return 0.5 * renewal_mean(first, t, policy) - odd_probability_sum(first, t, policy) / 2.0;
}

double odd_probability_sum(const ProcessSpec& spec, double t, const SeriesPolicy& policy) {
    spec.validate();
    require_order(spec, 1, "odd_probability_sum");
    check_time(t);
    if (t == 0.0) return 0.0;
    const double x = intensity(spec, t);
    return as_probability(scaled(spec.nu, spec.nu + 1.0, 1.0, 2.0 * x, 1.0, policy) / 2.0);
}

long long binomial_coefficient(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw InvalidParam("binomial coefficient needs 0 <= k <= n");
    k = std::min(k, n - k);
    long long c = 1;
    for (int i = 1; i <= k; ++i) {
        // c * (n - k + i) is divisible by i; divide first where possible to delay overflow
        const long long g = std::gcd(c, static_cast<long long>(i));
        const long long num = (n - k + i) / (i / g);
        if (c / g > std::numeric_limits<long long>::max() / num) throw InvalidParam("binomial coefficient overflows");
        c = c / g * num;
    }
    return c;
}

bool alternating_binomial_identity(int j, int k) {
    if (k < 1 || k > j) throw InvalidParam("identity needs 1 <= k <= j");
    const long long lhs = (k % 2 == 0 ? 1 : -1) * binomial_coefficient(j - 1, k - 1);
    long long rhs = 0;
    for (int m = k; m <= j; ++m) rhs += (m % 2 == 0 ? 1 : -1) * binomial_coefficient(j, m);
    return lhs == rhs;
}

}  // namespace fracpois
