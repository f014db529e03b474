#pragma once

#include <vector>

#include "mmab/env.hpp"
#include "mmab/rng.hpp"
#include "mmab/runner.hpp"

namespace mmab {

// Cumulative pseudo-regret and per-player expected rewards sampled at the
// given checkpoints, computed from true means and the collision-masked
// actions rather than realized draws.
struct RegretTrajectory {
    std::vector<long> checkpoints;
    std::vector<double> cum_regret;
    std::vector<std::vector<double>> per_player_expected; // [checkpoint][player]
};

// Homogeneous pseudo-regret against the top-M arm baseline.
RegretTrajectory pseudo_regret(const RunResult& run, const EnvModel& env,
                               const std::vector<long>& checkpoints);

// Expected social welfare of random serial dictatorship under a uniformly
// random dictator order, plus per-player expected utilities.
struct RsdBenchmark {
    double expected_welfare = 0.0;
    std::vector<double> per_player;
    long samples = 0; // 0 = exact enumeration
};

// choice_over_all_arms selects between the standard mechanism (dictators can
// pick any free arm) and the restricted variant confined to the first M arm
// indices; the standard reading is the default.
RsdBenchmark rsd_welfare_exact(const std::vector<std::vector<double>>& means,
                               bool choice_over_all_arms = true);
RsdBenchmark rsd_welfare_monte_carlo(const std::vector<std::vector<double>>& means, long samples,
                                     Rng& rng, bool choice_over_all_arms = true);

// RSD-regret: shortfall of the realized expected welfare against the RSD
// benchmark rate.
RegretTrajectory rsd_regret(const RunResult& run, const EnvModel& env,
                            const RsdBenchmark& benchmark, const std::vector<long>& checkpoints);

// Largest relative deviation of a player's realized reward from the mean
// realized reward.
double fairness_gap(const RunResult& run);

// Serial-dictatorship assignment for one fixed order (helper shared with the
// benchmarks and tests).
std::vector<int> serial_dictatorship(const std::vector<std::vector<double>>& means,
                                     const std::vector<int>& order, bool choice_over_all_arms);

} // namespace mmab
