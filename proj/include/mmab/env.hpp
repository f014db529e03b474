#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmab/rng.hpp"

namespace mmab {

enum class Sensing { FullSensing, StatisticSensing, NoSensing };

enum class DistributionKind { Bernoulli, Discrete };

const char* to_string(Sensing s);

// Thrown when a player submits an out-of-range action.
class ProtocolViolation : public std::runtime_error {
public:
    ProtocolViolation(int player, const std::string& what)
        : std::runtime_error(what), player_(player) {}
    int player() const { return player_; }

private:
    int player_;
};

// Immutable problem instance: arm distributions, sensing regime, horizon.
// Homogeneous runs share one mean per arm; heterogeneous runs hold an M x K
// matrix that must fit inside [(1-delta) mu_k, (1+delta) mu_k] for some base
// vector mu.
struct EnvModel {
    int num_arms = 0;
    int num_players = 0;
    long horizon = 0;
    Sensing sensing = Sensing::FullSensing;
    DistributionKind kind = DistributionKind::Bernoulli;
    std::vector<double> means;                      // K entries (homogeneous base)
    std::vector<std::vector<double>> player_means;  // M x K, empty when homogeneous
    double delta = 0.0;
    // Discrete kind: per-arm masses on the support {0, 0.5, 1}.
    std::vector<std::array<double, 3>> discrete_masses;
    std::vector<std::string> warnings;

    static EnvModel homogeneous(int K, int M, long T, std::vector<double> means, Sensing sensing,
                                DistributionKind kind = DistributionKind::Bernoulli);
    // Per-entry multipliers in [1-delta, 1+delta] applied to the base means.
    static EnvModel heterogeneous(int K, int M, long T, std::vector<double> base, double delta,
                                  const std::vector<std::vector<double>>& multipliers,
                                  Sensing sensing);
    // Full matrix validated against a feasible base vector.
    static EnvModel heterogeneous_matrix(int K, int M, long T,
                                         std::vector<std::vector<double>> matrix, double delta,
                                         Sensing sensing);

    bool heterogeneous() const { return !player_means.empty(); }
    double mean(int player, int arm) const {
        return heterogeneous() ? player_means[static_cast<std::size_t>(player)]
                                             [static_cast<std::size_t>(arm)]
                               : means[static_cast<std::size_t>(arm)];
    }
    // P(X > 0); equals the mean for Bernoulli arms.
    double alpha(int player, int arm) const;
};

// Per-player per-round feedback, filtered by the sensing regime.
struct Observation {
    long round = 0;
    int arm = 0;
    std::optional<double> value;     // X on the pulled arm
    std::optional<bool> collision;   // eta on the pulled arm
    double reward = 0.0;             // X * (1 - eta), always delivered
};

// Joint outcome of one round.
struct RoundTrace {
    long round = 0;
    std::vector<int> actions;        // arm per player
    std::vector<bool> collided;      // eta on each player's arm
};

struct StepResult {
    RoundTrace trace;
    std::vector<Observation> observations;
};

// Synchronous round-based stepper. Draws one value per arm per round
// (homogeneous) or per (player, arm) (heterogeneous), resolves collisions,
// and filters observations per the sensing regime.
class Environment {
public:
    Environment(const EnvModel& model, Rng rng);

    StepResult step(const std::vector<int>& actions);

    long round() const { return t_; }
    const EnvModel& model() const { return model_; }

private:
    double draw(int player, int arm);

    const EnvModel& model_;
    Rng rng_;
    long t_ = 0;
    std::vector<double> draws_;      // scratch, K or M*K per round
};

} // namespace mmab
