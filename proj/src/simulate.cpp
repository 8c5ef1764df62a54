#include "fracpois/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "fracpois/errors.hpp"
#include "fracpois/special_functions.hpp"

namespace fracpois {
namespace {

constexpr double y_small = 1e-3;     // below this the survival series is summed directly
constexpr double piece_width = 0.25;  // in s = log y
constexpr int cheb_nodes = 17;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double clenshaw(const std::vector<double>& c, double x) {
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) {
        const double b0 = 2.0 * x * b1 - b2 + c[k];
        b2 = b1;
        b1 = b0;
    }
    return x * b1 - b2 + 0.5 * c[0];
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 1) throw InvalidParam("n_paths must be >= 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidParam("horizon must be positive and finite");
}

Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed;
    const std::uint64_t base = splitmix64(state);
    state = base ^ (stream * 0xd1b54a32d192ed03ULL);
    return Rng(splitmix64(state));
}

std::string_view rng_description() {
    return "mt19937_64 per path, seeded by splitmix64(splitmix64(seed) ^ stream * 0xd1b54a32d192ed03)";
}

double uniform_open(Rng& rng) {
    // midpoint of one of 2^53 equal cells
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

InterarrivalSampler::InterarrivalSampler(double nu, double lambda) : nu_(nu), lambda_(lambda) {
    ProcessSpec{1, nu, lambda}.validate();
    time_cap_ = 1e12 / std::pow(lambda, 1.0 / nu);
    y_cap_ = std::pow(1e12, nu);
    if (nu == 1.0) return;

    for (int r = 0; r < 40; ++r) rgamma_.push_back(1.0 / std::tgamma(nu * r + 1.0));
    u_small_ = -std::expm1(log_survival_y(y_small));
    s_lo_ = std::log(y_small);
    s_hi_ = std::log(y_cap_);
    const int n_pieces = std::max(1, static_cast<int>(std::ceil((s_hi_ - s_lo_) / piece_width)));
    width_ = (s_hi_ - s_lo_) / n_pieces;
    pieces_.reserve(n_pieces);
    for (int p = 0; p < n_pieces; ++p) {
        Piece pc;
        pc.lo = s_lo_ + p * width_;
        pc.hi = p + 1 == n_pieces ? s_hi_ : pc.lo + width_;
        const double mid = 0.5 * (pc.lo + pc.hi), half = 0.5 * (pc.hi - pc.lo);
        std::vector<double> f(cheb_nodes);
        for (int j = 0; j < cheb_nodes; ++j) {
            const double x = std::cos(std::numbers::pi * (j + 0.5) / cheb_nodes);
            f[j] = std::log(ml(nu, 1.0, -std::exp(mid + half * x)));
        }
        pc.c.assign(cheb_nodes, 0.0);
        for (int k = 0; k < cheb_nodes; ++k) {
            double acc = 0.0;
            for (int j = 0; j < cheb_nodes; ++j) acc += f[j] * std::cos(std::numbers::pi * k * (j + 0.5) / cheb_nodes);
            pc.c[k] = 2.0 * acc / cheb_nodes;
        }
        // derivative series, rescaled to d/ds
        pc.dc.assign(cheb_nodes, 0.0);
        for (int k = cheb_nodes - 1; k >= 1; --k)
            pc.dc[k - 1] = (k + 1 < cheb_nodes ? pc.dc[k + 1] : 0.0) + 2.0 * k * pc.c[k];
        for (double& d : pc.dc) d /= half;
        pieces_.push_back(std::move(pc));
    }
    log_v_cap_ = clenshaw(pieces_.back().c, 1.0);
}

const InterarrivalSampler::Piece& InterarrivalSampler::piece_at(double s) const {
    const auto i = static_cast<std::size_t>(std::clamp((s - s_lo_) / width_, 0.0, pieces_.size() - 1.0));
    return pieces_[i];
}

double InterarrivalSampler::log_survival_y(double y) const {
    if (nu_ == 1.0) return -y;
    if (y <= y_small) {
        // 1 - E(-y) summed without the leading 1
        double term = 1.0, f = 0.0;
        for (int r = 1; r < 40; ++r) {
            term *= -y;
            const double add = -term * rgamma_[r];
            f += add;
            if (std::abs(add) < 1e-18 * f) break;
        }
        return std::log1p(-f);
    }
    const double s = std::log(y);
    if (pieces_.empty() || s > s_hi_) return std::log(ml(nu_, 1.0, -y));
    const Piece& pc = piece_at(s);
    return clenshaw(pc.c, (2.0 * s - pc.lo - pc.hi) / (pc.hi - pc.lo));
}

double InterarrivalSampler::survival(double t) const {
    if (!(t >= 0.0)) throw InvalidParam("survival needs t >= 0");
    return std::exp(log_survival_y(lambda_ * std::pow(t, nu_)));
}

double InterarrivalSampler::solve_small(double u) const {
    // Newton on F(y) = 1 - E(-y) = sum_{r>=1} (-1)^{r+1} y^r / Gamma(nu r + 1); F is increasing.
    double y = u * std::tgamma(1.0 + nu_);
    for (int it = 0; it < 60; ++it) {
        double f = 0.0, df = 0.0, pw = 1.0;
        for (int r = 1; r < 40; ++r) {
            const double g = rgamma_[r];
            const double sgn = r % 2 == 1 ? 1.0 : -1.0;
            df += sgn * r * pw * g;
            pw *= y;
            f += sgn * pw * g;
            if (pw * g < 1e-19 * f) break;
        }
        const double step = (f - u) / df;
        y = std::clamp(y - step, 0.5 * y, 2.0 * y);
        if (std::abs(step) <= 1e-14 * y) return y;
    }
    throw RootFindingFailure("survival inversion did not converge near the origin");
}

double InterarrivalSampler::solve_table(double log_v) const {
    // pieces are ordered by s and the log survival decreases; locate the bracketing piece
    std::size_t lo = 0, hi = pieces_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (clenshaw(pieces_[mid].c, 1.0) > log_v) lo = mid + 1;
        else hi = mid;
    }
    const Piece& pc = pieces_[lo];
    const double half = 0.5 * (pc.hi - pc.lo), mid = 0.5 * (pc.hi + pc.lo);
    double a = -1.0, b = 1.0, x = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double g = clenshaw(pc.c, x) - log_v;
        if (g > 0.0) a = x;
        else b = x;
        const double dg = clenshaw(pc.dc, x) * half;
        double next = dg < 0.0 ? x - g / dg : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - x) * half <= 1e-13 || b - a <= 1e-15) return std::exp(mid + half * next);
        x = next;
    }
    throw RootFindingFailure("survival inversion did not converge");
}

double InterarrivalSampler::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw InvalidParam("quantile level must lie in (0, 1)");
    if (nu_ == 1.0) return -std::log1p(-u) / lambda_;
    if (u <= u_small_) return std::pow(solve_small(u) / lambda_, 1.0 / nu_);
    return quantile_from_survival(1.0 - u);
}

double InterarrivalSampler::quantile_from_survival(double v) const {
    if (!(v > 0.0 && v < 1.0)) throw InvalidParam("survival level must lie in (0, 1)");
    if (nu_ == 1.0) return -std::log(v) / lambda_;
    const double log_v = std::log(v);
    if (log_v < log_v_cap_) {
        std::ostringstream msg;
        msg << "interarrival quantile exceeds the bracket cap " << time_cap_ << " (survival level " << v << ")";
        throw RootFindingFailure(msg.str());
    }
    // 1 - v is exact for v >= 1/2, which covers the near-origin branch
    const double u = 1.0 - v;
    const double y = u <= u_small_ ? solve_small(u) : solve_table(log_v);
    return std::pow(y / lambda_, 1.0 / nu_);
}

double sample_interarrival_model1(double nu, double lambda, Rng& rng) {
    return InterarrivalSampler(nu, lambda)(rng);
}

EventPath sample_path(const ProcessSpec& spec, double horizon, const InterarrivalSampler& sampler, Rng& rng) {
    spec.validate();
    if (sampler.nu() != spec.nu || sampler.lambda() != spec.lambda)
        throw InvalidParam("sampler parameters do not match the process");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidParam("horizon must be positive and finite");
    const double v_cap = sampler.survival(sampler.time_cap());
    EventPath path{horizon, {}};
    double now = 0.0;
    for (;;) {
        double gap = 0.0;
        bool beyond = false;
        for (int j = 0; j < spec.n && !beyond; ++j) {
            const double v = uniform_open(rng);
            if (v < v_cap) {
                // this draw lies past the cap; only the fact that it passes the horizon matters
                if (horizon - now - gap < sampler.time_cap()) {
                    beyond = true;
                    break;
                }
            }
            gap += sampler.quantile_from_survival(v);
        }
        if (beyond || now + gap > horizon) break;
        if (!(now + gap > now)) throw NumericalInstability("interarrival below the time resolution");
        now += gap;
        path.events.push_back(now);
    }
    return path;
}

EventPath sample_path(const ProcessSpec& spec, const SimConfig& config, Rng& rng) {
    config.validate();
    return sample_path(spec, config.horizon, InterarrivalSampler(spec.nu, spec.lambda), rng);
}

std::vector<EventPath> simulate_paths(const ProcessSpec& spec, const SimConfig& config, int threads) {
    spec.validate();
    config.validate();
    const InterarrivalSampler sampler(spec.nu, spec.lambda);
    std::vector<EventPath> paths(static_cast<std::size_t>(config.n_paths));
    threads = std::clamp(threads, 1, config.n_paths);
    auto work = [&](int w) {
        for (int i = w; i < config.n_paths; i += threads) {
            Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(i));
            paths[i] = sample_path(spec, config.horizon, sampler, rng);
        }
    };
    if (threads == 1) {
        work(0);
        return paths;
    }
    std::exception_ptr failure;
    std::mutex m;
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                try {
                    work(w);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!failure) failure = std::current_exception();
                }
            });
    }
    if (failure) std::rethrow_exception(failure);
    return paths;
}

int count_at(const EventPath& path, double t) {
    return static_cast<int>(std::upper_bound(path.events.begin(), path.events.end(), t) - path.events.begin());
}

std::vector<double> empirical_pmf(std::span<const EventPath> paths, double t) {
    if (paths.empty()) throw InvalidParam("no paths");
    if (!(t >= 0.0)) throw InvalidParam("probe time must be >= 0");
    std::vector<long> counts;
    for (const EventPath& p : paths) {
        if (t > p.horizon) throw InvalidParam("probe time beyond the simulated horizon");
        const auto k = static_cast<std::size_t>(count_at(p, t));
        if (k >= counts.size()) counts.resize(k + 1, 0);
        ++counts[k];
    }
    std::vector<double> out(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) out[k] = static_cast<double>(counts[k]) / paths.size();
    return out;
}

CountStats count_stats(std::span<const EventPath> paths, double t) {
    if (paths.size() < 2) throw InvalidParam("count statistics need at least two paths");
    double mean = 0.0, m2 = 0.0;
    int n = 0;
    for (const EventPath& p : paths) {
        if (t > p.horizon) throw InvalidParam("probe time beyond the simulated horizon");
        const double c = count_at(p, t);
        ++n;
        const double d = c - mean;
        mean += d / n;
        m2 += d * (c - mean);
    }
    return {mean, std::sqrt(m2 / (n - 1) / n), n};
}

CheckReport pmf_agreement(std::span<const EventPath> paths, const ProcessSpec& spec, double t, double z,
                          double min_expected) {
    const std::vector<double> emp = empirical_pmf(paths, t);
    const double n = static_cast<double>(paths.size());
    double worst = 0.0;
    int worst_k = -1, bins = 0;
    std::ostringstream detail;
    for (int k = 0;; ++k) {
        const double p = pmf(spec, k, t);
        if (k >= static_cast<int>(emp.size()) && n * p < min_expected) break;
        if (n * p < min_expected) continue;
        const double e = k < static_cast<int>(emp.size()) ? emp[k] : 0.0;
        const double dev = (e - p) / std::sqrt(p * (1.0 - p) / n);
        ++bins;
        detail << (bins > 1 ? " " : "") << "k" << k << ":" << fmt(e) << "/" << fmt(p);
        if (std::abs(dev) >= std::abs(worst)) {
            worst = dev;
            worst_k = k;
        }
    }
    if (bins == 0) throw InvalidParam("no bin reaches the minimum expected count");
    return CheckReport::compare("pmf-vs-simulation", worst, 0.0, z,
                                "worst bin k=" + std::to_string(worst_k) + "; empirical/analytic " + detail.str());
}

CheckReport mean_count_agreement(std::span<const EventPath> paths, const ProcessSpec& spec, double t, double z) {
    const CountStats s = count_stats(paths, t);
    const double m = renewal_mean(spec, t);
    const double dev = s.std_error > 0.0 ? (s.mean - m) / s.std_error : (s.mean == m ? 0.0 : 1e300);
    return CheckReport::compare("mean-count-vs-renewal", dev, 0.0, z,
                                "empirical " + fmt(s.mean) + " +- " + fmt(s.std_error) + ", analytic " + fmt(m));
}

CheckReport poisson_relabel_check(double lambda, const SimConfig& config, double z) {
    config.validate();
    const ProcessSpec poisson{1, 1.0, lambda};
    const ProcessSpec second{2, 1.0, lambda};
    std::vector<EventPath> folded = simulate_paths(poisson, config);
    for (EventPath& p : folded) {
        // keep every second event: N-hat(t) = floor(N(t) / 2)
        std::vector<double> kept;
        for (std::size_t i = 1; i < p.events.size(); i += 2) kept.push_back(p.events[i]);
        p.events = std::move(kept);
    }
    CheckReport r = pmf_agreement(folded, second, config.horizon, z);
    r.name = "poisson-relabel";
    return r;
}

void write_paths_jsonl(std::ostream& out, std::span<const EventPath> paths, std::uint64_t first_stream) {
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const nlohmann::json line{{"seed_stream", first_stream + i}, {"events", paths[i].events}};
        out << line.dump() << '\n';
    }
}

}  // namespace fracpois
