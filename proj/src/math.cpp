#include "mmab/math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mmab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double bernoulli_kl(double p, double q) {
    if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0)) {
        throw std::domain_error("bernoulli_kl: arguments must lie in [0,1]");
    }
    if (p == q) return 0.0;
    if (q <= 0.0 || q >= 1.0) return kInf;
    double out = 0.0;
    if (p > 0.0) out += p * std::log(p / q);
    if (p < 1.0) out += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    return out;
}

double klucb_index(double mean, long pulls, double budget) {
    if (!(mean >= 0.0 && mean <= 1.0)) {
        throw std::domain_error("klucb_index: mean must lie in [0,1]");
    }
    if (pulls < 0 || budget < 0.0) {
        throw std::domain_error("klucb_index: pulls and budget must be nonnegative");
    }
    if (pulls == 0) return 1.0;
    if (mean >= 1.0) return 1.0;
    if (budget == 0.0) return mean;
    const double n = static_cast<double>(pulls);

    // Saturation: when even the largest representable q < 1 stays inside the
    // budget, the supremum is indistinguishable from 1 at double precision.
    if (n * bernoulli_kl(mean, std::nextafter(1.0, 0.0)) <= budget) return 1.0;

    // Solve n * kl(mean, 1 - e^{-u}) = budget for u; kl has u-derivative
    // (q - mean)/q <= 1, so bisection on u controls the residual directly.
    auto q_of = [](double u) { return 1.0 - std::exp(-u); };
    auto g = [&](double u) { return n * bernoulli_kl(mean, q_of(u)) - budget; };

    double lo = -std::log1p(-mean); // q = mean, g(lo) = -budget < 0
    double hi = std::max(lo * 2.0 + 1.0, 1.0);
    while (g(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (std::abs(gm) <= 1e-9) return q_of(mid);
        (gm < 0.0 ? lo : hi) = mid;
    }
    return q_of(lo);
}

double explo_budget(double t) {
    if (t < 1.0) throw std::domain_error("explo_budget: t must be >= 1");
    const double tt = std::max(t, 3.0);
    return std::log(tt) + 4.0 * std::log(std::log(tt));
}

double quantize(double mean, int p, Rng& rng) {
    const double scale = std::ldexp(1.0, p); // 2^p
    const double scaled = scale * mean;
    const double fl = std::floor(scaled);
    const double frac = scaled - fl;
    const double up = rng.uniform01() < frac ? 1.0 : 0.0;
    return (fl + up) / scale;
}

double trimmed_mean(const std::vector<double>& values) {
    const std::size_t m = values.size();
    if (m < 3) throw std::domain_error("trimmed_mean: needs at least 3 values");
    std::size_t i_max = 0;
    for (std::size_t i = 1; i < m; ++i) {
        if (values[i] > values[i_max]) i_max = i;
    }
    std::size_t i_min = i_max == 0 ? 1 : 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i == i_max) continue;
        if (values[i] < values[i_min]) i_min = i;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i != i_max && i != i_min) sum += values[i];
    }
    return sum / static_cast<double>(m - 2);
}

std::vector<double> punishment_probs_raw(const std::vector<double>& est_means, int m_players,
                                         double gamma_factor) {
    if (m_players < 2) throw std::domain_error("punishment_probs: M must be >= 2");
    if (!(gamma_factor > 0.0 && gamma_factor <= 1.0)) {
        throw std::domain_error("punishment_probs: gamma_factor must lie in (0,1]");
    }
    std::vector<double> mu(est_means);
    for (double& x : mu) x = std::max(x, 1e-12);

    std::vector<double> sorted(mu);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double top_sum = 0.0;
    const int m_top = std::min<int>(m_players, static_cast<int>(sorted.size()));
    for (int i = 0; i < m_top; ++i) top_sum += sorted[static_cast<std::size_t>(i)];
    const double mu_bar = top_sum / static_cast<double>(m_players);

    const double inv_exp = 1.0 / static_cast<double>(m_players - 1);
    std::vector<double> p(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        p[k] = std::max(1.0 - std::pow(gamma_factor * mu_bar / mu[k], inv_exp), 0.0);
    }
    return p;
}

std::vector<double> punishment_probs(const std::vector<double>& est_means, int m_players,
                                     double gamma_factor) {
    std::vector<double> p = punishment_probs_raw(est_means, m_players, gamma_factor);
    double sum = 0.0;
    for (double x : p) sum += x;
    if (sum <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
        return p;
    }
    for (double& x : p) x /= sum;
    return p;
}

bool MultPrecisionState::step(double x) {
    n_ += 1;
    mean_ += (x - mean_) / static_cast<double>(n_);
    sumsq_ += x * x;
    if (n_ >= 2) {
        const double var = (sumsq_ - static_cast<double>(n_) * mean_ * mean_) /
                           static_cast<double>(n_ - 1);
        s_ = std::sqrt(std::max(var, 0.0));
        const double rhs = 2.0 * s_ * std::sqrt(log_t_ / static_cast<double>(n_)) +
                           14.0 * log_t_ / (3.0 * static_cast<double>(n_ - 1));
        if (!stopped_ && delta_ * mean_ >= rhs) stopped_ = true;
    } else {
        s_ = 0.0;
    }
    return stopped_;
}

long mult_precision_n0(double delta, double mu, double log_t) {
    const double inner = std::sqrt(9.0 / (delta * delta) + 96.0 / delta + 85.0) + 3.0 / delta + 1.0;
    return static_cast<long>(std::ceil(2.0 / (3.0 * delta * mu) * log_t * inner)) + 2;
}

} // namespace mmab
