#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "fracpois/check_report.hpp"
#include "fracpois/models.hpp"

namespace fracpois {

struct EventPath {
    double horizon = 0.0;
    std::vector<double> events;  // strictly increasing, all in (0, horizon]
};

struct SimConfig {
    std::uint64_t seed = 0;
    int n_paths = 1;
    double horizon = 1.0;

    void validate() const;
};

// Path i draws from its own mt19937_64, seeded with splitmix64 applied to
// (seed, i); streams are independent of how paths are spread over threads.
using Rng = std::mt19937_64;
Rng make_stream(std::uint64_t seed, std::uint64_t stream);
std::string_view rng_description();

// Uniform on (0, 1) with 53 random bits; never returns 0 or 1.
double uniform_open(Rng& rng);

// Inverts the first-order survival function E_{nu,1}(-lambda t^nu).  Construction
// tabulates log E_{nu,1}(-e^s) piecewise in Chebyshev form, so build once and reuse.
class InterarrivalSampler {
public:
    InterarrivalSampler(double nu, double lambda);

    double nu() const { return nu_; }
    double lambda() const { return lambda_; }
    // Largest time the solver will return: 1e12 / lambda^{1/nu}.
    double time_cap() const { return time_cap_; }

    // Survival E_{nu,1}(-lambda t^nu) from the table (direct evaluation off its range).
    double survival(double t) const;
    // t with Pr{U <= t} = u, 0 < u < 1.
    double quantile(double u) const;
    // t with Pr{U > t} = v, 0 < v < 1.
    double quantile_from_survival(double v) const;

    double operator()(Rng& rng) const { return quantile_from_survival(uniform_open(rng)); }

private:
    struct Piece {
        double lo, hi;
        std::vector<double> c, dc;  // Chebyshev coefficients of the log survival and its derivative
    };

    double solve_small(double u) const;         // y with 1 - E(-y) = u, y <= y_small
    double solve_table(double log_v) const;     // y with log E(-y) = log_v
    double log_survival_y(double y) const;
    const Piece& piece_at(double s) const;

    double nu_, lambda_;
    double time_cap_ = 0.0;
    double y_cap_ = 0.0;
    double s_lo_ = 0.0, s_hi_ = 0.0, width_ = 0.0;
    double u_small_ = 0.0;        // 1 - E(-y_small)
    double log_v_cap_ = 0.0;      // log E(-y_cap)
    std::vector<double> rgamma_;  // 1 / Gamma(nu r + 1), r = 0, 1, ...
    std::vector<Piece> pieces_;
};

// One draw from the first-order interarrival law.  Builds a sampler per call;
// reuse an InterarrivalSampler for anything beyond a handful of draws.
double sample_interarrival_model1(double nu, double lambda, Rng& rng);

// Event times on [0, horizon]; each interarrival is the sum of n first-order ones.
EventPath sample_path(const ProcessSpec& spec, double horizon, const InterarrivalSampler& sampler, Rng& rng);
EventPath sample_path(const ProcessSpec& spec, const SimConfig& config, Rng& rng);
// Paths for streams 0 .. n_paths-1, spread over `threads` workers.
std::vector<EventPath> simulate_paths(const ProcessSpec& spec, const SimConfig& config, int threads = 1);

int count_at(const EventPath& path, double t);

// Fraction of paths with exactly k events in (0, t]; sums to 1.
std::vector<double> empirical_pmf(std::span<const EventPath> paths, double t);

struct CountStats {
    double mean = 0.0;
    double std_error = 0.0;
    int paths = 0;
};
CountStats count_stats(std::span<const EventPath> paths, double t);

// Every bin with expected count >= min_expected must lie within z binomial
// standard errors of the analytic pmf.  Reports the worst bin.
CheckReport pmf_agreement(std::span<const EventPath> paths, const ProcessSpec& spec, double t,
                          double z = 3.0, double min_expected = 25.0);

// Sample mean count against the renewal function, within z standard errors.
CheckReport mean_count_agreement(std::span<const EventPath> paths, const ProcessSpec& spec, double t,
                                 double z = 3.0);

// Standard Poisson counts folded by floor(N / 2) against the n = 2, nu = 1 pmf.
CheckReport poisson_relabel_check(double lambda, const SimConfig& config, double z = 3.0);

// One JSON object per line: {"seed_stream": i, "events": [...]}.
void write_paths_jsonl(std::ostream& out, std::span<const EventPath> paths, std::uint64_t first_stream = 0);

}  // namespace fracpois
