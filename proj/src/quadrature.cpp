#include "fracpois/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <vector>

#include "fracpois/errors.hpp"

namespace fracpois {
namespace {

// Kronrod abscissae, descending; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b, value, error, abs_value;
    bool operator<(const Segment& o) const { return error < o.error; }
};

// One GK15 panel with the QUADPACK error heuristic, which folds in a
// round-off floor so smooth integrands do not chase unreachable tolerances.
Segment gk15(const Integrand& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double resk = fc * wgk[7];
    double resg = fc * wg[3];
    double resabs = std::abs(resk);
    std::array<double, 7> f1{}, f2{};
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        f1[j] = f(centre - dx);
        f2[j] = f(centre + dx);
        resk += wgk[j] * (f1[j] + f2[j]);
        resabs += wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) resg += wg[j / 2] * (f1[j] + f2[j]);
    }
    const double mean = resk * 0.5;
    double resasc = wgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += wgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
    const double ah = std::abs(half);
    double err = std::abs((resk - resg) * half);
    resasc *= ah;
    resabs *= ah;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * resabs, err);
    return {a, b, resk * half, err, resabs};
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, const QuadPolicy& policy,
                     std::span<const double> breakpoints) {
    if (!(policy.abs_tol > 0.0) || !(policy.rel_tol >= 0.0) || policy.max_subdivisions < 1)
        throw InvalidParam("quadrature policy needs abs_tol > 0, rel_tol >= 0 and max_subdivisions >= 1");
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidParam("integration limits must be finite");
    QuadResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    const double sign = a < b ? 1.0 : -1.0;
    if (b < a) std::swap(a, b);

    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<Segment> heap;
    double total = 0.0, total_err = 0.0, total_abs = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Segment s = gk15(f, cuts[i], cuts[i + 1]);
        total += s.value;
        total_err += s.error;
        total_abs += s.abs_value;
        heap.push(s);
    }

    // Past ~100 eps of the absolute integral the error estimate is round-off, not truncation.
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto target = [&] {
        return std::max({policy.abs_tol, policy.rel_tol * std::abs(total), 100.0 * eps * total_abs});
    };
    int intervals = static_cast<int>(heap.size());
    while (total_err > target() && intervals < policy.max_subdivisions) {
        Segment worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;  // cannot split further
        heap.pop();
        Segment left = gk15(f, worst.a, mid);
        Segment right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        ++intervals;
    }

    // Re-add from scratch to shed the drift of the running updates.
    total = total_err = total_abs = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        total_abs += heap.top().abs_value;
        heap.pop();
    }
    out.value = sign * total;
    out.error = total_err;
    out.abs_integral = total_abs;
    out.intervals = intervals;
    out.converged = std::isfinite(total) && total_err <= target();
    return out;
}

double integrate_checked(const Integrand& f, double a, double b, const QuadPolicy& policy,
                         std::span<const double> breakpoints) {
    const QuadResult r = integrate(f, a, b, policy, breakpoints);
    if (!r.converged) {
        std::ostringstream msg;
        msg << "quadrature on [" << a << ", " << b << "] stopped at error estimate " << r.error
            << " after " << r.intervals << " intervals";
        throw QuadratureFailure(msg.str());
    }
    return r.value;
}

double tail_cutoff(double rate, double abs_tol) {
    if (!(rate > 0.0) || !(abs_tol > 0.0)) throw InvalidParam("tail_cutoff needs positive rate and tolerance");
    return std::log(10.0 / abs_tol) / rate;
}

}  // namespace fracpois
