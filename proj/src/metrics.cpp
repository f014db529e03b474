#include "mmab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mmab {

namespace {

double top_m_sum(const std::vector<double>& means, int m) {
    std::vector<double> sorted(means);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return std::accumulate(sorted.begin(), sorted.begin() + m, 0.0);
}

RegretTrajectory accumulate_regret(const RunResult& run, const EnvModel& env,
                                   double baseline_per_round,
                                   const std::vector<long>& checkpoints) {
    RegretTrajectory out;
    out.checkpoints = checkpoints;
    std::sort(out.checkpoints.begin(), out.checkpoints.end());
    const int M = run.num_players;
    std::vector<double> expected(static_cast<std::size_t>(M), 0.0);
    std::size_t next = 0;
    double realized = 0.0;
    for (long t = 0; t < run.horizon && next < out.checkpoints.size(); ++t) {
        for (int j = 0; j < M; ++j) {
            if (!run.collision(t, j)) {
                const double mu = env.mean(j, run.action(t, j));
                expected[static_cast<std::size_t>(j)] += mu;
                realized += mu;
            }
        }
        while (next < out.checkpoints.size() && out.checkpoints[next] == t + 1) {
            out.cum_regret.push_back(baseline_per_round * static_cast<double>(t + 1) - realized);
            out.per_player_expected.push_back(expected);
            next += 1;
        }
    }
    return out;
}

} // namespace

RegretTrajectory pseudo_regret(const RunResult& run, const EnvModel& env,
                               const std::vector<long>& checkpoints) {
    if (env.heterogeneous()) {
        throw std::invalid_argument("pseudo_regret: requires a homogeneous model");
    }
    return accumulate_regret(run, env, top_m_sum(env.means, env.num_players), checkpoints);
}

std::vector<int> serial_dictatorship(const std::vector<std::vector<double>>& means,
                                     const std::vector<int>& order, bool choice_over_all_arms) {
    const int m = static_cast<int>(means.size());
    const int num_arms = static_cast<int>(means.front().size());
    const int limit = choice_over_all_arms ? num_arms : m;
    std::vector<bool> taken(static_cast<std::size_t>(num_arms), false);
    std::vector<int> assignment(static_cast<std::size_t>(m), -1);
    for (int player : order) {
        int best = -1;
        double best_mu = -1.0;
        for (int a = 0; a < limit; ++a) {
            if (taken[static_cast<std::size_t>(a)]) continue;
            const double mu = means[static_cast<std::size_t>(player)][static_cast<std::size_t>(a)];
            if (mu > best_mu) {
                best_mu = mu;
                best = a;
            }
        }
        assignment[static_cast<std::size_t>(player)] = best;
        taken[static_cast<std::size_t>(best)] = true;
    }
    return assignment;
}

RsdBenchmark rsd_welfare_exact(const std::vector<std::vector<double>>& means,
                               bool choice_over_all_arms) {
    const int m = static_cast<int>(means.size());
    if (m > 8) throw std::invalid_argument("rsd_welfare_exact: exact enumeration capped at M=8");
    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);

    RsdBenchmark out;
    out.per_player.assign(static_cast<std::size_t>(m), 0.0);
    long count = 0;
    do {
        const std::vector<int> assignment =
            serial_dictatorship(means, order, choice_over_all_arms);
        for (int j = 0; j < m; ++j) {
            out.per_player[static_cast<std::size_t>(j)] +=
                means[static_cast<std::size_t>(j)]
                     [static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])];
        }
        count += 1;
    } while (std::next_permutation(order.begin(), order.end()));
    for (double& u : out.per_player) u /= static_cast<double>(count);
    out.expected_welfare = std::accumulate(out.per_player.begin(), out.per_player.end(), 0.0);
    return out;
}

RsdBenchmark rsd_welfare_monte_carlo(const std::vector<std::vector<double>>& means, long samples,
                                     Rng& rng, bool choice_over_all_arms) {
    const int m = static_cast<int>(means.size());
    RsdBenchmark out;
    out.samples = samples;
    out.per_player.assign(static_cast<std::size_t>(m), 0.0);
    std::vector<int> order(static_cast<std::size_t>(m));
    for (long s = 0; s < samples; ++s) {
        std::iota(order.begin(), order.end(), 0);
        for (int i = m - 1; i > 0; --i) { // Fisher-Yates
            const int j = rng.uniform_int(i + 1);
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
        }
        const std::vector<int> assignment =
            serial_dictatorship(means, order, choice_over_all_arms);
        for (int j = 0; j < m; ++j) {
            out.per_player[static_cast<std::size_t>(j)] +=
                means[static_cast<std::size_t>(j)]
                     [static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])];
        }
    }
    for (double& u : out.per_player) u /= static_cast<double>(samples);
    out.expected_welfare = std::accumulate(out.per_player.begin(), out.per_player.end(), 0.0);
    return out;
}

RegretTrajectory rsd_regret(const RunResult& run, const EnvModel& env,
                            const RsdBenchmark& benchmark, const std::vector<long>& checkpoints) {
    return accumulate_regret(run, env, benchmark.expected_welfare, checkpoints);
}

double fairness_gap(const RunResult& run) {
    const double mean = std::accumulate(run.cum_reward.begin(), run.cum_reward.end(), 0.0) /
                        static_cast<double>(run.cum_reward.size());
    double worst = 0.0;
    for (double r : run.cum_reward) {
        worst = std::max(worst, std::abs(r - mean));
    }
    return mean > 0.0 ? worst / mean : 0.0;
}

} // namespace mmab
