#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mmab/env.hpp"

using namespace mmab;

TEST_CASE("collisions destroy reward for everyone involved") {
    auto model = EnvModel::homogeneous(4, 2, 100, {1.0, 0.9, 0.8, 0.7}, Sensing::FullSensing);
    Environment env(model, Rng(1));
    const auto step = env.step({2, 2});
    CHECK(step.observations[0].reward == 0.0);
    CHECK(step.observations[1].reward == 0.0);
    CHECK(step.trace.collided[0]);
    CHECK(step.trace.collided[1]);
    CHECK(*step.observations[0].collision);
}

TEST_CASE("degenerate arm pays deterministically when alone") {
    auto model = EnvModel::homogeneous(3, 1, 10, {1.0, 0.5, 0.2}, Sensing::FullSensing);
    Environment env(model, Rng(2));
    for (int t = 0; t < 10; ++t) {
        const auto step = env.step({0});
        CHECK(step.observations[0].reward == 1.0);
        CHECK_FALSE(*step.observations[0].collision);
    }
}

TEST_CASE("statistic sensing hides the collision bit when the draw is zero") {
    auto model = EnvModel::homogeneous(2, 2, 10000, {0.5, 0.4}, Sensing::StatisticSensing);
    Environment env(model, Rng(3));
    bool saw_zero_without_bit = false;
    bool saw_positive_with_bit = false;
    for (int t = 0; t < 2000; ++t) {
        const auto step = env.step({0, 1}); // no collision
        for (const auto& obs : step.observations) {
            REQUIRE(obs.value.has_value());
            if (*obs.value == 0.0) {
                CHECK_FALSE(obs.collision.has_value());
                saw_zero_without_bit = true;
            } else {
                REQUIRE(obs.collision.has_value());
                CHECK_FALSE(*obs.collision);
                saw_positive_with_bit = true;
            }
        }
    }
    CHECK(saw_zero_without_bit);
    CHECK(saw_positive_with_bit);
}

TEST_CASE("no sensing delivers only the reward") {
    auto model = EnvModel::homogeneous(2, 1, 10, {0.5, 0.4}, Sensing::NoSensing);
    Environment env(model, Rng(4));
    const auto step = env.step({0});
    CHECK_FALSE(step.observations[0].value.has_value());
    CHECK_FALSE(step.observations[0].collision.has_value());
}

TEST_CASE("reward identity and reward-vs-draw accounting hold every round") {
    auto model =
        EnvModel::homogeneous(5, 3, 500, {0.9, 0.7, 0.5, 0.3, 0.1}, Sensing::FullSensing);
    Environment env(model, Rng(5));
    Rng action_rng(99);
    for (int t = 0; t < 500; ++t) {
        std::vector<int> actions;
        for (int j = 0; j < 3; ++j) actions.push_back(action_rng.uniform_int(5));
        const auto step = env.step(actions);
        double total_reward = 0.0;
        double distinct_draw_sum = 0.0;
        std::vector<int> seen;
        for (int j = 0; j < 3; ++j) {
            const auto& obs = step.observations[static_cast<std::size_t>(j)];
            CHECK(obs.reward ==
                  doctest::Approx(*obs.value * (*obs.collision ? 0.0 : 1.0)));
            total_reward += obs.reward;
            if (std::find(seen.begin(), seen.end(), obs.arm) == seen.end()) {
                seen.push_back(obs.arm);
                distinct_draw_sum += *obs.value;
            }
        }
        CHECK(total_reward <= distinct_draw_sum + 1e-12);
    }
}

TEST_CASE("uncontested empirical mean concentrates") {
    // 1e4 pulls on an uncontested arm: |mean - mu| < 4 sqrt(mu(1-mu)/n).
    const double mu = 0.35;
    auto model = EnvModel::homogeneous(2, 1, 20000, {mu, 0.9}, Sensing::FullSensing);
    Environment env(model, Rng(6));
    double sum = 0.0;
    const int n = 10000;
    for (int t = 0; t < n; ++t) sum += env.step({0}).observations[0].reward;
    CHECK(std::abs(sum / n - mu) < 4.0 * std::sqrt(mu * (1 - mu) / n));
}

TEST_CASE("discrete arms separate alpha from the mean") {
    auto model = EnvModel::homogeneous(2, 1, 100000, {0.3, 0.6}, Sensing::StatisticSensing,
                                       DistributionKind::Discrete);
    CHECK(model.alpha(0, 0) == doctest::Approx(0.6)); // all mass on 0.5
    CHECK(model.mean(0, 0) == doctest::Approx(0.3));
    CHECK(model.alpha(0, 1) > model.mean(0, 1));
    Environment env(model, Rng(7));
    double sum = 0.0;
    int positive = 0;
    const int n = 50000;
    for (int t = 0; t < n; ++t) {
        const double x = *env.step({0}).observations[0].value;
        sum += x;
        if (x > 0.0) positive += 1;
    }
    CHECK(sum / n == doctest::Approx(0.3).epsilon(0.05));
    CHECK(static_cast<double>(positive) / n == doctest::Approx(0.6).epsilon(0.05));
}

TEST_CASE("heterogeneous construction validates the delta band") {
    const std::vector<double> base{0.8, 0.5, 0.2};
    SUBCASE("multipliers inside the band pass") {
        auto model = EnvModel::heterogeneous(
            3, 2, 100, base, 0.1, {{1.05, 0.95, 1.0}, {0.9, 1.1, 1.02}}, Sensing::FullSensing);
        CHECK(model.heterogeneous());
        CHECK(model.mean(0, 0) == doctest::Approx(0.84));
        CHECK(model.mean(1, 1) == doctest::Approx(0.55));
    }
    SUBCASE("multipliers outside the band throw") {
        CHECK_THROWS_AS(EnvModel::heterogeneous(3, 2, 100, base, 0.1,
                                                {{1.2, 1.0, 1.0}, {1.0, 1.0, 1.0}},
                                                Sensing::FullSensing),
                        std::invalid_argument);
    }
    SUBCASE("matrix with a feasible base passes, infeasible throws") {
        CHECK_NOTHROW(EnvModel::heterogeneous_matrix(
            2, 2, 100, {{0.8, 0.45}, {0.75, 0.5}}, 0.1, Sensing::FullSensing));
        CHECK_THROWS_AS(EnvModel::heterogeneous_matrix(2, 2, 100, {{0.9, 0.5}, {0.3, 0.5}}, 0.1,
                                                       Sensing::FullSensing),
                        std::invalid_argument);
    }
}

TEST_CASE("validation errors and warnings") {
    CHECK_THROWS_AS(EnvModel::homogeneous(3, 4, 100, {0.1, 0.2, 0.3}, Sensing::FullSensing),
                    std::invalid_argument);
    CHECK_THROWS_AS(EnvModel::homogeneous(2, 1, 100, {0.5, 1.5}, Sensing::FullSensing),
                    std::invalid_argument);
    auto dup = EnvModel::homogeneous(2, 1, 100, {0.5, 0.5}, Sensing::FullSensing);
    CHECK_FALSE(dup.warnings.empty());

    auto model = EnvModel::homogeneous(3, 2, 100, {0.9, 0.5, 0.1}, Sensing::FullSensing);
    Environment env(model, Rng(8));
    CHECK_THROWS_AS(env.step({0, 3}), ProtocolViolation);
    try {
        env.step({0, -1});
    } catch (const ProtocolViolation& e) {
        CHECK(e.player() == 1);
    }
}

TEST_CASE("colliding players share the same realization") {
    auto model = EnvModel::homogeneous(3, 2, 3000, {0.5, 0.5, 0.5}, Sensing::FullSensing);
    Environment env(model, Rng(9));
    for (int t = 0; t < 3000; ++t) {
        const auto step = env.step({1, 1});
        CHECK(*step.observations[0].value == *step.observations[1].value);
    }
}
