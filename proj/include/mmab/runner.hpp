#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mmab/env.hpp"
#include "mmab/player.hpp"

namespace mmab {

struct RunEvent {
    long round = 0;
    int player = 0;
    EventKind kind = EventKind::PhaseChange;
    double a = 0.0;
    double b = 0.0;
};

// Full record of one run: joint actions, collision flags, realized rewards
// and the merged per-player event log.
struct RunResult {
    int num_arms = 0;
    int num_players = 0;
    long horizon = 0;
    std::vector<int> actions;          // row-major [t * M + j]
    std::vector<std::uint8_t> collided;
    std::vector<double> cum_reward;    // realized, per player, at horizon
    std::vector<RunEvent> events;
    std::vector<std::string> phase_at; // player 0's phase at each checkpoint

    int action(long t, int j) const {
        return actions[static_cast<std::size_t>(t) * static_cast<std::size_t>(num_players) +
                       static_cast<std::size_t>(j)];
    }
    bool collision(long t, int j) const {
        return collided[static_cast<std::size_t>(t) * static_cast<std::size_t>(num_players) +
                        static_cast<std::size_t>(j)] != 0;
    }
};

// Plays the synchronous game to the horizon. The environment stream is
// substream(seed, "env"); players are expected to have been built with
// substream(seed, "player", j). checkpoints, when given (sorted, 1-based
// round counts), make the runner sample player 0's phase label.
RunResult run_game(const EnvModel& model, std::vector<std::unique_ptr<Player>>& players,
                   std::uint64_t seed, const std::vector<long>& checkpoints = {});

} // namespace mmab
