#pragma once

#include <vector>

#include "mmab/env.hpp"

namespace mmab {

enum class EventKind {
    PhaseChange,     // a = phase id (algorithm-specific)
    EstimatedM,      // a = estimate, b = 1 if clamped
    RankFixed,       // a = rank
    RankFallback,
    PunishTriggered, // a = reason id
    PunishSignal,
    EstimationDone,
    SamplingStart,
    CommStart,       // a = phase index
    CommEnd,         // a = phase index
    InitEnd,
    ExploitStart,
    ListenStart,
    ListenEnd,
    PrefSignalStart,
    PrefSignalEnd,
    Inspection,      // a = inspected player
    InspectionCaught,
    ProtocolFailure,
};

const char* to_string(EventKind k);

struct PlayerEvent {
    long round = 0;
    EventKind kind = EventKind::PhaseChange;
    double a = 0.0;
    double b = 0.0;
};

// Per-player decision machine. The run loop calls act() exactly once per
// round, feeds the joint actions to the environment, then delivers this
// player's observation via observe(). Machines hold single-owner state and
// see nothing but their own observations.
class Player {
public:
    virtual ~Player() = default;

    virtual int act(long t) = 0;
    virtual void observe(const Observation& obs) = 0;

    // Human-readable phase label for logs and CSV output.
    virtual const char* phase_name() const { return "-"; }

    const std::vector<PlayerEvent>& events() const { return events_; }

protected:
    void log_event(long t, EventKind kind, double a = 0.0, double b = 0.0) {
        events_.push_back(PlayerEvent{t, kind, a, b});
    }

private:
    std::vector<PlayerEvent> events_;
};

// Adversaries flagged omniscient additionally see each round's joint outcome.
class OmniscientHook {
public:
    virtual ~OmniscientHook() = default;
    virtual void see_round(const RoundTrace& trace) = 0;
};

} // namespace mmab
