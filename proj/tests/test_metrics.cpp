#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mmab/metrics.hpp"

using namespace mmab;

namespace {

// Hand-built run traces for regret accounting.
RunResult fixed_run(int K, int M, long T, const std::vector<int>& arms_per_player,
                    bool collide_all = false) {
    RunResult run;
    run.num_arms = K;
    run.num_players = M;
    run.horizon = T;
    run.actions.resize(static_cast<std::size_t>(T * M));
    run.collided.resize(run.actions.size());
    run.cum_reward.assign(static_cast<std::size_t>(M), 0.0);
    for (long t = 0; t < T; ++t) {
        for (int j = 0; j < M; ++j) {
            run.actions[static_cast<std::size_t>(t * M + j)] =
                arms_per_player[static_cast<std::size_t>(j)];
            run.collided[static_cast<std::size_t>(t * M + j)] = collide_all ? 1 : 0;
        }
    }
    return run;
}

} // namespace

TEST_CASE("pseudo_regret worked examples") {
    auto env = EnvModel::homogeneous(4, 2, 100, {0.9, 0.7, 0.5, 0.3}, Sensing::FullSensing);
    SUBCASE("players parked on the top arms have zero regret") {
        auto run = fixed_run(4, 2, 100, {0, 1});
        auto traj = pseudo_regret(run, env, {1, 50, 100});
        for (double r : traj.cum_regret) CHECK(r == doctest::Approx(0.0));
    }
    SUBCASE("everyone colliding forfeits the whole baseline") {
        auto run = fixed_run(4, 2, 100, {0, 0}, true);
        auto traj = pseudo_regret(run, env, {100});
        CHECK(traj.cum_regret[0] == doctest::Approx(100 * (0.9 + 0.7)));
    }
    SUBCASE("sitting one arm too low pays the gap per round") {
        auto run = fixed_run(4, 2, 100, {0, 2}); // 0.5 instead of 0.7
        auto traj = pseudo_regret(run, env, {25, 100});
        CHECK(traj.cum_regret[0] == doctest::Approx(25 * (0.7 - 0.5)));
        CHECK(traj.cum_regret[1] == doctest::Approx(100 * (0.7 - 0.5)));
    }
    SUBCASE("accounting identity at every checkpoint") {
        auto run = fixed_run(4, 2, 100, {1, 2});
        auto traj = pseudo_regret(run, env, {10, 60, 100});
        for (std::size_t c = 0; c < traj.checkpoints.size(); ++c) {
            const double expected_sum =
                std::accumulate(traj.per_player_expected[c].begin(),
                                traj.per_player_expected[c].end(), 0.0);
            CHECK(expected_sum + traj.cum_regret[c] ==
                  doctest::Approx((0.9 + 0.7) * traj.checkpoints[c]).epsilon(1e-9));
        }
    }
    SUBCASE("heterogeneous models are rejected") {
        auto het = EnvModel::heterogeneous(2, 2, 10, {0.5, 0.4}, 0.1,
                                           {{1.0, 1.0}, {1.0, 1.0}}, Sensing::FullSensing);
        auto run = fixed_run(2, 2, 10, {0, 1});
        CHECK_THROWS_AS(pseudo_regret(run, het, {10}), std::invalid_argument);
    }
}

TEST_CASE("rsd welfare exact enumeration") {
    SUBCASE("identical preferences average the top arms") {
        const std::vector<std::vector<double>> means{
            {0.9, 0.7, 0.5, 0.2}, {0.9, 0.7, 0.5, 0.2}, {0.9, 0.7, 0.5, 0.2}};
        auto bench = rsd_welfare_exact(means);
        CHECK(bench.expected_welfare == doctest::Approx(0.9 + 0.7 + 0.5));
        for (double u : bench.per_player) {
            CHECK(u == doctest::Approx((0.9 + 0.7 + 0.5) / 3.0));
        }
    }
    SUBCASE("disjoint favorites give everyone her top arm") {
        const std::vector<std::vector<double>> means{{0.9, 0.1, 0.1}, {0.1, 0.8, 0.1},
                                                     {0.1, 0.1, 0.7}};
        auto bench = rsd_welfare_exact(means);
        CHECK(bench.expected_welfare == doctest::Approx(0.9 + 0.8 + 0.7));
    }
    SUBCASE("two players contesting one arm average the two serial outcomes") {
        const std::vector<std::vector<double>> means{{0.9, 0.5}, {0.8, 0.3}};
        auto bench = rsd_welfare_exact(means);
        // Order (0,1): 0.9 + 0.3; order (1,0): 0.8 + 0.5.
        CHECK(bench.expected_welfare == doctest::Approx(0.5 * (1.2 + 1.3)));
        CHECK(bench.per_player[0] == doctest::Approx(0.5 * (0.9 + 0.5)));
        CHECK(bench.per_player[1] == doctest::Approx(0.5 * (0.3 + 0.8)));
    }
    SUBCASE("restricted choice set follows the first-M reading") {
        const std::vector<std::vector<double>> means{{0.1, 0.2, 0.9}, {0.1, 0.2, 0.8}};
        auto all = rsd_welfare_exact(means, true);
        auto firstm = rsd_welfare_exact(means, false);
        CHECK(all.expected_welfare > firstm.expected_welfare);
        CHECK(firstm.expected_welfare == doctest::Approx(0.2 + 0.1));
    }
}

TEST_CASE("exact and Monte Carlo RSD benchmarks agree") {
    Rng mk(97);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<std::vector<double>> means(4, std::vector<double>(6));
        for (auto& row : means) {
            for (double& v : row) v = mk.uniform01();
        }
        auto exact = rsd_welfare_exact(means);
        Rng rng(1234 + trial);
        auto mc = rsd_welfare_monte_carlo(means, 100000, rng);
        // Bernoulli-style CI on the welfare estimate: welfare per draw is
        // bounded by M, keep 3 sigma with a conservative variance bound.
        const double sigma = 4.0 / std::sqrt(100000.0);
        CHECK(std::abs(exact.expected_welfare - mc.expected_welfare) < 3 * sigma);
    }
}

TEST_CASE("rsd_regret reduces to pseudo-regret for one player") {
    auto env = EnvModel::heterogeneous(3, 1, 50, {0.9, 0.5, 0.2}, 0.0, {{1.0, 1.0, 1.0}},
                                       Sensing::FullSensing);
    auto bench = rsd_welfare_exact(env.player_means);
    CHECK(bench.expected_welfare == doctest::Approx(0.9));
    auto run = fixed_run(3, 1, 50, {1}); // sits on 0.5
    auto traj = rsd_regret(run, env, bench, {50});
    CHECK(traj.cum_regret[0] == doctest::Approx(50 * (0.9 - 0.5)));
}

TEST_CASE("fairness gap is zero for equal rewards") {
    RunResult run;
    run.cum_reward = {10.0, 10.0, 10.0};
    CHECK(fairness_gap(run) == doctest::Approx(0.0));
    run.cum_reward = {12.0, 10.0, 8.0};
    CHECK(fairness_gap(run) == doctest::Approx(0.2));
}
