#pragma once

#include <vector>

#include "fracpois/check_report.hpp"
#include "fracpois/special_functions.hpp"

namespace fracpois {

// Model of order n: every event of the counting process corresponds to
// n events of the first-order process.  n = 1 is the first type, n = 2 the second.
struct ProcessSpec {
    int n = 1;
    double nu = 1.0;
    double lambda = 1.0;

    void validate() const;
};

// Pr{N(t) = k}.  t = 0 gives the indicator of k = 0.
double pmf(const ProcessSpec& spec, int k, double t, const SeriesPolicy& policy = {});
std::vector<double> pmf_table(const ProcessSpec& spec, int k_max, double t,
                              const SeriesPolicy& policy = {});

// Smallest K with Pr{T_{K+1} < t} below tail_tol, so that sum_{k<=K} pmf >= 1 - tail_tol.
int normalization_cutoff(const ProcessSpec& spec, double t, double tail_tol = 1e-10,
                         const SeriesPolicy& policy = {});

// pmf of order n against the sum of the n matching first-order probabilities.
CheckReport pmf_decomposition_check(const ProcessSpec& spec, int k, double t, double tol = 1e-10,
                                    const SeriesPolicy& policy = {});

// Density and distribution function of the time of the k-th event, k >= 1.
double waiting_time_pdf(const ProcessSpec& spec, int k, double t, const SeriesPolicy& policy = {});
double waiting_time_cdf(const ProcessSpec& spec, int k, double t, const SeriesPolicy& policy = {});

double interarrival_pdf(const ProcessSpec& spec, double t, const SeriesPolicy& policy = {});

struct TailAsymptote {
    double value = 0.0;
    bool applicable = true;    // false for nu = 1, where the decay is exponential
    bool extrapolated = false;  // true for n > 2
};
TailAsymptote interarrival_tail_asymptote(const ProcessSpec& spec, double t);

// Probability generating function E[u^N(t)], n in {1, 2}, 1e-12 <= u <= 1.
double pgf(const ProcessSpec& spec, double u, double t, const SeriesPolicy& policy = {});

// E[N(N-1)...(N-r+1)] for the first-order model.
double factorial_moment(const ProcessSpec& spec, int r, double t);

// Expected number of events by time t, n in {1, 2}.
double renewal_mean(const ProcessSpec& spec, double t, const SeriesPolicy& policy = {});
// The n = 2 renewal function rewritten through first-order quantities.
double renewal_mean_from_first_order(const ProcessSpec& spec, double t,
                                     const SeriesPolicy& policy = {});

// Pr{N(t) odd} for the first-order model.
double odd_probability_sum(const ProcessSpec& spec, double t, const SeriesPolicy& policy = {});

// Exact binomial coefficient; throws InvalidParam on overflow of 64 bits.
long long binomial_coefficient(int n, int k);
// C(j-1, k-1) (-1)^k == sum_{m=k}^{j} C(j, m) (-1)^m, 1 <= k <= j, in integer arithmetic.
bool alternating_binomial_identity(int j, int k);

}  // namespace fracpois
