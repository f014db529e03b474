#include "mmab/runner.hpp"

#include <algorithm>

namespace mmab {

RunResult run_game(const EnvModel& model, std::vector<std::unique_ptr<Player>>& players,
                   std::uint64_t seed, const std::vector<long>& checkpoints) {
    const int M = model.num_players;
    if (static_cast<int>(players.size()) != M) {
        throw std::invalid_argument("run_game: player count must match the model");
    }
    Environment env(model, Rng::substream(seed, "env"));

    RunResult result;
    result.num_arms = model.num_arms;
    result.num_players = M;
    result.horizon = model.horizon;
    result.actions.resize(static_cast<std::size_t>(model.horizon) * static_cast<std::size_t>(M));
    result.collided.resize(result.actions.size());
    result.cum_reward.assign(static_cast<std::size_t>(M), 0.0);

    std::vector<int> actions(static_cast<std::size_t>(M));
    std::size_t next_checkpoint = 0;
    for (long t = 0; t < model.horizon; ++t) {
        for (int j = 0; j < M; ++j) {
            actions[static_cast<std::size_t>(j)] = players[static_cast<std::size_t>(j)]->act(t);
        }
        StepResult step = env.step(actions);
        const std::size_t base = static_cast<std::size_t>(t) * static_cast<std::size_t>(M);
        for (int j = 0; j < M; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            result.actions[base + sj] = actions[sj];
            result.collided[base + sj] = step.trace.collided[sj] ? 1 : 0;
            result.cum_reward[sj] += step.observations[sj].reward;
            players[sj]->observe(step.observations[sj]);
        }
        for (int j = 0; j < M; ++j) {
            if (auto* hook = dynamic_cast<OmniscientHook*>(players[static_cast<std::size_t>(j)].get())) {
                hook->see_round(step.trace);
            }
        }
        while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == t + 1) {
            result.phase_at.push_back(players.front()->phase_name());
            next_checkpoint += 1;
        }
    }

    for (int j = 0; j < M; ++j) {
        for (const PlayerEvent& e : players[static_cast<std::size_t>(j)]->events()) {
            result.events.push_back(RunEvent{e.round, j, e.kind, e.a, e.b});
        }
    }
    std::stable_sort(result.events.begin(), result.events.end(),
                     [](const RunEvent& x, const RunEvent& y) { return x.round < y.round; });
    return result;
}

const char* to_string(EventKind k) {
    switch (k) {
    case EventKind::PhaseChange: return "phase";
    case EventKind::EstimatedM: return "estimated_m";
    case EventKind::RankFixed: return "rank_fixed";
    case EventKind::RankFallback: return "rank_fallback";
    case EventKind::PunishTriggered: return "punish_triggered";
    case EventKind::PunishSignal: return "punish_signal";
    case EventKind::EstimationDone: return "estimation_done";
    case EventKind::SamplingStart: return "sampling_start";
    case EventKind::CommStart: return "comm_start";
    case EventKind::CommEnd: return "comm_end";
    case EventKind::InitEnd: return "init_end";
    case EventKind::ExploitStart: return "exploit_start";
    case EventKind::ListenStart: return "listen_start";
    case EventKind::ListenEnd: return "listen_end";
    case EventKind::PrefSignalStart: return "pref_signal_start";
    case EventKind::PrefSignalEnd: return "pref_signal_end";
    case EventKind::Inspection: return "inspection";
    case EventKind::InspectionCaught: return "inspection_caught";
    case EventKind::ProtocolFailure: return "protocol_failure";
    }
    return "?";
}

} // namespace mmab
