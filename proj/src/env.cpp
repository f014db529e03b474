#include "mmab/env.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mmab {

const char* to_string(Sensing s) {
    switch (s) {
    case Sensing::FullSensing: return "full";
    case Sensing::StatisticSensing: return "statistic";
    case Sensing::NoSensing: return "none";
    }
    return "?";
}

namespace {

void check_common(int K, int M, long T) {
    if (K < 1) throw std::invalid_argument("EnvModel: K must be positive");
    if (M < 1 || M > K) throw std::invalid_argument("EnvModel: requires 1 <= M <= K");
    if (T < 1) throw std::invalid_argument("EnvModel: horizon must be positive");
}

void check_means(const std::vector<double>& mu) {
    for (double m : mu) {
        if (!(m >= 0.0 && m <= 1.0)) {
            throw std::invalid_argument("EnvModel: all means must lie in [0,1]");
        }
    }
}

} // namespace

EnvModel EnvModel::homogeneous(int K, int M, long T, std::vector<double> means, Sensing sensing,
                               DistributionKind kind) {
    check_common(K, M, T);
    if (static_cast<int>(means.size()) != K) {
        throw std::invalid_argument("EnvModel: means must have K entries");
    }
    check_means(means);
    EnvModel env;
    env.num_arms = K;
    env.num_players = M;
    env.horizon = T;
    env.sensing = sensing;
    env.kind = kind;
    env.means = std::move(means);
    std::set<double> distinct(env.means.begin(), env.means.end());
    if (static_cast<int>(distinct.size()) != K) {
        env.warnings.push_back("homogeneous means are not pairwise distinct");
    }
    if (kind == DistributionKind::Discrete) {
        // Default masses reproduce the requested mean while putting as much
        // mass as possible on 0.5, so that alpha = P(X > 0) exceeds mu.
        env.discrete_masses.resize(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            const double mu = env.means[static_cast<std::size_t>(k)];
            const double q_half = mu <= 0.5 ? 2.0 * mu : 2.0 * (1.0 - mu);
            const double q_one = mu - 0.5 * q_half;
            env.discrete_masses[static_cast<std::size_t>(k)] = {1.0 - q_half - q_one, q_half,
                                                                q_one};
        }
    }
    return env;
}

EnvModel EnvModel::heterogeneous(int K, int M, long T, std::vector<double> base, double delta,
                                 const std::vector<std::vector<double>>& multipliers,
                                 Sensing sensing) {
    check_common(K, M, T);
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw std::invalid_argument("EnvModel: delta must lie in [0,1)");
    }
    if (static_cast<int>(base.size()) != K) {
        throw std::invalid_argument("EnvModel: base means must have K entries");
    }
    check_means(base);
    if (static_cast<int>(multipliers.size()) != M) {
        throw std::invalid_argument("EnvModel: multipliers must have M rows");
    }
    std::vector<std::vector<double>> matrix(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
        const auto& row = multipliers[static_cast<std::size_t>(j)];
        if (static_cast<int>(row.size()) != K) {
            throw std::invalid_argument("EnvModel: multiplier rows must have K entries");
        }
        auto& out = matrix[static_cast<std::size_t>(j)];
        out.resize(static_cast<std::size_t>(K));
        for (int k = 0; k < K; ++k) {
            const double f = row[static_cast<std::size_t>(k)];
            if (!(f >= 1.0 - delta - 1e-12 && f <= 1.0 + delta + 1e-12)) {
                throw std::invalid_argument("EnvModel: multiplier outside [1-delta, 1+delta]");
            }
            out[static_cast<std::size_t>(k)] =
                std::min(1.0, base[static_cast<std::size_t>(k)] * f);
        }
    }
    EnvModel env;
    env.num_arms = K;
    env.num_players = M;
    env.horizon = T;
    env.sensing = sensing;
    env.kind = DistributionKind::Bernoulli;
    env.means = std::move(base);
    env.player_means = std::move(matrix);
    env.delta = delta;
    return env;
}

EnvModel EnvModel::heterogeneous_matrix(int K, int M, long T,
                                        std::vector<std::vector<double>> matrix, double delta,
                                        Sensing sensing) {
    check_common(K, M, T);
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw std::invalid_argument("EnvModel: delta must lie in [0,1)");
    }
    if (static_cast<int>(matrix.size()) != M) {
        throw std::invalid_argument("EnvModel: matrix must have M rows");
    }
    std::vector<double> base(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        double hi = 1.0;     // upper end of feasible base interval
        double lo = 0.0;     // lower end
        for (int j = 0; j < M; ++j) {
            const auto& row = matrix[static_cast<std::size_t>(j)];
            if (static_cast<int>(row.size()) != K) {
                throw std::invalid_argument("EnvModel: matrix rows must have K entries");
            }
            const double v = row[static_cast<std::size_t>(k)];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("EnvModel: all means must lie in [0,1]");
            }
            // Need base with v in [(1-delta) base, (1+delta) base].
            lo = std::max(lo, v / (1.0 + delta));
            hi = std::min(hi, delta < 1.0 && v > 0.0 ? v / (1.0 - delta) : 1.0);
        }
        if (lo > hi + 1e-12) {
            throw std::invalid_argument(
                "EnvModel: no base vector makes the matrix delta-heterogeneous (arm " +
                std::to_string(k) + ")");
        }
        base[static_cast<std::size_t>(k)] = 0.5 * (lo + std::min(hi, 1.0));
    }
    EnvModel env;
    env.num_arms = K;
    env.num_players = M;
    env.horizon = T;
    env.sensing = sensing;
    env.kind = DistributionKind::Bernoulli;
    env.means = std::move(base);
    env.player_means = std::move(matrix);
    env.delta = delta;
    return env;
}

double EnvModel::alpha(int player, int arm) const {
    if (kind == DistributionKind::Bernoulli) return mean(player, arm);
    const auto& m = discrete_masses[static_cast<std::size_t>(arm)];
    return m[1] + m[2];
}

Environment::Environment(const EnvModel& model, Rng rng) : model_(model), rng_(rng) {
    const std::size_t per_round = model_.heterogeneous()
                                      ? static_cast<std::size_t>(model_.num_players) *
                                            static_cast<std::size_t>(model_.num_arms)
                                      : static_cast<std::size_t>(model_.num_arms);
    draws_.resize(per_round);
}

double Environment::draw(int player, int arm) {
    const double u = rng_.uniform01();
    if (model_.kind == DistributionKind::Bernoulli) {
        return u < model_.mean(player, arm) ? 1.0 : 0.0;
    }
    const auto& m = model_.discrete_masses[static_cast<std::size_t>(arm)];
    if (u < m[0]) return 0.0;
    if (u < m[0] + m[1]) return 0.5;
    return 1.0;
}

StepResult Environment::step(const std::vector<int>& actions) {
    const int K = model_.num_arms;
    const int M = model_.num_players;
    if (static_cast<int>(actions.size()) != M) {
        throw std::invalid_argument("Environment::step: one action per player expected");
    }
    if (t_ >= model_.horizon) {
        throw std::logic_error("Environment::step: horizon exhausted");
    }
    for (int j = 0; j < M; ++j) {
        const int a = actions[static_cast<std::size_t>(j)];
        if (a < 0 || a >= K) {
            throw ProtocolViolation(j, "player " + std::to_string(j) + " pulled arm " +
                                           std::to_string(a) + " outside [0," +
                                           std::to_string(K - 1) + "]");
        }
    }

    // One draw per arm (and per player when heterogeneous) regardless of the
    // joint action, so paired runs at one seed share the same realizations.
    if (model_.heterogeneous()) {
        for (int j = 0; j < M; ++j) {
            for (int k = 0; k < K; ++k) {
                draws_[static_cast<std::size_t>(j * K + k)] = draw(j, k);
            }
        }
    } else {
        for (int k = 0; k < K; ++k) {
            draws_[static_cast<std::size_t>(k)] = draw(0, k);
        }
    }

    std::vector<int> pull_count(static_cast<std::size_t>(K), 0);
    for (int a : actions) pull_count[static_cast<std::size_t>(a)] += 1;

    StepResult out;
    out.trace.round = t_;
    out.trace.actions = actions;
    out.trace.collided.resize(static_cast<std::size_t>(M));
    out.observations.resize(static_cast<std::size_t>(M));
    for (int j = 0; j < M; ++j) {
        const int a = actions[static_cast<std::size_t>(j)];
        const bool eta = pull_count[static_cast<std::size_t>(a)] > 1;
        const double x = model_.heterogeneous() ? draws_[static_cast<std::size_t>(j * K + a)]
                                                : draws_[static_cast<std::size_t>(a)];
        out.trace.collided[static_cast<std::size_t>(j)] = eta;

        Observation& obs = out.observations[static_cast<std::size_t>(j)];
        obs.round = t_;
        obs.arm = a;
        obs.reward = x * (eta ? 0.0 : 1.0);
        switch (model_.sensing) {
        case Sensing::FullSensing:
            obs.value = x;
            obs.collision = eta;
            break;
        case Sensing::StatisticSensing:
            obs.value = x;
            if (x > 0.0) obs.collision = eta;
            break;
        case Sensing::NoSensing:
            break;
        }
    }
    t_ += 1;
    return out;
}

} // namespace mmab
