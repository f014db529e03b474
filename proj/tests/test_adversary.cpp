#include <doctest.h>

#include <memory>

#include "mmab/adversary.hpp"
#include "mmab/env.hpp"
#include "mmab/runner.hpp"

using namespace mmab;

TEST_CASE("adversary spec parsing") {
    auto a = AdversarySpec::parse("best-arm-committer");
    CHECK(a.kind == AdversaryKind::BestArmCommitter);
    auto b = AdversarySpec::parse("stat-liar:arm=2,v1=1,v2=0");
    CHECK(b.kind == AdversaryKind::StatLiar);
    CHECK(b.target_arm == 2);
    CHECK(b.fake_value == 1.0);
    REQUIRE(b.fake_value_leader2.has_value());
    CHECK(*b.fake_value_leader2 == 0.0);
    auto c = AdversarySpec::parse("jammer:jam-arm=3");
    CHECK(c.kind == AdversaryKind::Jammer);
    REQUIRE(c.jam_arm.has_value());
    CHECK(*c.jam_arm == 3);
    CHECK_THROWS_AS(AdversarySpec::parse("quantum-cheater"), std::invalid_argument);
    CHECK_THROWS_AS(AdversarySpec::parse("jammer:frequency=9"), std::invalid_argument);
}

TEST_CASE("best arm committer against undefended uniform players") {
    // Reward rate should approach mu_1 (1 - 1/K)^(M-1).
    const int K = 5, M = 3;
    const long T = 40000;
    auto model = EnvModel::homogeneous(K, M, T, {0.9, 0.5, 0.4, 0.3, 0.2}, Sensing::FullSensing);

    class UniformPlayer : public Player {
    public:
        explicit UniformPlayer(Rng rng) : rng_(rng) {}
        int act(long) override { return rng_.uniform_int(5); }
        void observe(const Observation&) override {}

    private:
        Rng rng_;
    };

    std::vector<std::unique_ptr<Player>> players;
    players.push_back(std::make_unique<UniformPlayer>(Rng::substream(3, "player", 0)));
    players.push_back(std::make_unique<UniformPlayer>(Rng::substream(3, "player", 1)));
    players.push_back(std::make_unique<BestArmCommitter>(model, 2));
    auto run = run_game(model, players, 3);
    const double rate = run.cum_reward[2] / static_cast<double>(T);
    const double expect = 0.9 * std::pow(1.0 - 1.0 / K, M - 1);
    CHECK(rate == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("fixed-arm jammer occupies its target") {
    auto model = EnvModel::homogeneous(3, 2, 1000, {0.9, 0.5, 0.2}, Sensing::FullSensing);
    AdversarySpec spec;
    spec.kind = AdversaryKind::Jammer;
    spec.jam_arm = 1;
    std::vector<std::unique_ptr<Player>> players;
    players.push_back(std::make_unique<BestArmCommitter>(model, 0));
    players.push_back(std::make_unique<Jammer>(spec, model));
    auto run = run_game(model, players, 4);
    for (long t = 0; t < 1000; ++t) CHECK(run.action(t, 1) == 1);
}

TEST_CASE("victim-chasing jammer tracks the previous action") {
    auto model = EnvModel::homogeneous(4, 2, 500, {0.9, 0.5, 0.3, 0.2}, Sensing::FullSensing);
    AdversarySpec spec;
    spec.kind = AdversaryKind::Jammer;
    spec.jam_victim = 0;

    class Cycler : public Player {
    public:
        int act(long t) override { return static_cast<int>(t % 4); }
        void observe(const Observation&) override {}
    };

    std::vector<std::unique_ptr<Player>> players;
    players.push_back(std::make_unique<Cycler>());
    players.push_back(std::make_unique<Jammer>(spec, model));
    auto run = run_game(model, players, 5);
    for (long t = 1; t < 500; ++t) {
        CHECK(run.action(t, 1) == run.action(t - 1, 0));
    }
}

TEST_CASE("greedy best response never explores below the true top set") {
    const int K = 5, M = 2;
    const long T = 60000;
    auto model = EnvModel::homogeneous(K, M, T, {0.9, 0.8, 0.5, 0.4, 0.3},
                                       Sensing::StatisticSensing);
    std::vector<std::unique_ptr<Player>> players;
    players.push_back(std::make_unique<SelfishRobustMmab>(
        SelfishRobustMmabConfig{K, T, 1.0}, Rng::substream(6, "player", 0)));
    players.push_back(std::make_unique<GreedyBestResponse>(
        SelfishRobustMmabConfig{K, T, 1.0}, Rng::substream(6, "player", 1), model, 1));
    auto run = run_game(model, players, 6);
    // After her init, the greedy deviator only ever pulls arms 0 or 1.
    long first_explo = -1;
    for (const auto& e : run.events) {
        if (e.player == 1 && e.kind == EventKind::PhaseChange && e.a == 4.0) {
            first_explo = e.round; // Phase::Explo
        }
    }
    REQUIRE(first_explo > 0);
    for (long t = first_explo + 1; t < T; ++t) {
        CHECK(run.action(t, 1) <= 1);
    }
}
