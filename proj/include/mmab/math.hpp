#pragma once

#include <cstddef>
#include <vector>

#include "mmab/rng.hpp"

namespace mmab {

// Bernoulli KL divergence kl(p, q) = p ln(p/q) + (1-p) ln((1-p)/(1-q)),
// with the 0 ln 0 = 0 convention; +inf when q is degenerate and p differs.
// Throws std::domain_error outside [0,1]^2.
double bernoulli_kl(double p, double q);

// kl-UCB index: sup{ q >= 0 | pulls * kl(mean, q) <= budget }.
// Conventions: pulls == 0 -> 1 (unpulled arms are fully optimistic),
// budget == 0 -> mean. Bisection runs in u = -log(1-q) space so the
// residual |pulls*kl(mean,b) - budget| stays below 1e-6 whenever b < 1.
double klucb_index(double mean, long pulls, double budget);

// Exploration budget f(t) = log t + 4 log log t, clamped to its value at
// t = 3 below that (log log is singular at t <= 1).
double explo_budget(double t);

// Randomized rounding of mean onto the 2^-p dyadic grid; unbiased.
double quantize(double mean, int p, Rng& rng);

// Mean of the values after dropping one maximal and one minimal element
// (ties broken by lowest index). Requires >= 3 values.
double trimmed_mean(const std::vector<double>& values);

// Raw punishment probabilities p_k = max(1 - (g * mu_bar_M / mu_k)^(1/(M-1)), 0)
// where mu_bar_M is the mean of the M largest entries and g = gamma_factor.
// Estimates <= 0 are clamped to 1e-12. Guarantees sum(p) <= 1 for
// gamma_factor <= (1-1/K)^(M-1).
std::vector<double> punishment_probs_raw(const std::vector<double>& est_means, int m_players,
                                         double gamma_factor);

// Raw probabilities renormalized to a full distribution; uniform fallback
// when every raw entry is zero.
std::vector<double> punishment_probs(const std::vector<double>& est_means, int m_players,
                                     double gamma_factor);

// Sequential mean estimation with multiplicative precision target. Feeding
// samples updates the running statistics; stopped() flips once
//   delta * mean >= 2 * S_t * sqrt(log_T / n) + 14 * log_T / (3 (n - 1))
// at some n >= 2.
class MultPrecisionState {
public:
    MultPrecisionState() = default;
    MultPrecisionState(double delta, double log_t) : delta_(delta), log_t_(log_t) {}

    // Returns true when the stopping rule fires with this sample.
    bool step(double x);

    bool stopped() const { return stopped_; }
    long count() const { return n_; }
    double mean() const { return mean_; }
    double sumsq() const { return sumsq_; }
    double sample_std() const { return s_; }
    double delta() const { return delta_; }
    double log_t() const { return log_t_; }

private:
    double delta_ = 0.1;
    double log_t_ = 1.0;
    long n_ = 0;
    double mean_ = 0.0;
    double sumsq_ = 0.0;
    double s_ = 0.0;
    bool stopped_ = false;
};

// Sample-size bound n0 under which the stopping rule is guaranteed to fire
// with probability at least 1 - 3/T.
long mult_precision_n0(double delta, double mu, double log_t);

} // namespace mmab
