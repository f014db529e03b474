#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmab/algo_rsdgt.hpp"
#include "mmab/algo_sicgt.hpp"
#include "mmab/algo_statistic.hpp"
#include "mmab/env.hpp"
#include "mmab/player.hpp"

namespace mmab {

enum class AdversaryKind {
    BestArmCommitter,
    GreedyBestResponse,
    RankRigger,
    StatLiar,
    MessageCorruptor,
    Jammer,
    PreferenceLiar,
};

struct AdversarySpec {
    AdversaryKind kind = AdversaryKind::BestArmCommitter;
    // StatLiar: arm whose statistic is faked and the values reported to each
    // leader (equal values lie consistently, unequal ones trip cross-checks).
    int target_arm = 0;
    double fake_value = 1.0;
    std::optional<double> fake_value_leader2;
    // MessageCorruptor: communication phase and tuple to jam.
    int corrupt_phase = 1;
    int corrupt_sender = 2;
    int corrupt_receiver = 0;
    int corrupt_arm = 0;
    int corrupt_leg = 0;
    int corrupt_bit = 1;
    // Jammer: fixed target arm, or a victim player to chase (omniscient).
    std::optional<int> jam_arm;
    std::optional<int> jam_victim;
    // PreferenceLiar: fake mean vector driving reported preferences; deviate
    // makes her sit on her true best arm once everyone exploits.
    std::vector<double> fake_means;
    bool deviate = false;

    static AdversarySpec parse(const std::string& text); // e.g. "stat-liar:arm=2,v1=1,v2=0"
    std::string name() const;
};

// Omniscient arm committer: always pulls her own best true arm.
class BestArmCommitter : public Player {
public:
    BestArmCommitter(const EnvModel& env, int player_index);
    int act(long) override { return best_arm_; }
    void observe(const Observation&) override {}
    const char* phase_name() const override { return "best_arm"; }

private:
    int best_arm_;
};

// Upper-bound deviation against ExploOne: runs the honest statistic-sensing
// initialization to stay synchronized and hold a rank, then always pulls the
// slot arm of the true top-M list (never exploring).
class GreedyBestResponse : public SelfishRobustMmab {
public:
    GreedyBestResponse(const SelfishRobustMmabConfig& cfg, Rng rng, const EnvModel& env,
                       int player_index);
    int act(long t) override;
    const char* phase_name() const override { return "greedy_best_response"; }

private:
    std::vector<int> true_top_; // ascending arm index
};

// Fixed-arm jammer, or a chaser that replays the victim's previous action.
class Jammer : public Player, public OmniscientHook {
public:
    Jammer(const AdversarySpec& spec, const EnvModel& env);
    int act(long t) override;
    void observe(const Observation&) override {}
    void see_round(const RoundTrace& trace) override;
    const char* phase_name() const override { return "jammer"; }

private:
    std::optional<int> arm_;
    std::optional<int> victim_;
    int last_victim_arm_ = 0;
};

// SIC-GT deviant reporting a fake statistic for one arm, optionally a
// different fake per leader.
class StatLiar : public SicGtPlayer {
public:
    StatLiar(const Config& cfg, Rng rng, const AdversarySpec& spec);
    const char* phase_name() const override { return "stat_liar"; }

protected:
    double value_to_send(int arm, int leader) const override;

private:
    int target_arm_;
    double fake_[2];
};

// SIC-GT deviant that jams one scheduled bit of another player's transfer.
class MessageCorruptor : public SicGtPlayer {
public:
    MessageCorruptor(const Config& cfg, Rng rng, const AdversarySpec& spec);
    const char* phase_name() const override { return "message_corruptor"; }

protected:
    int jam_override(const CommSlot& slot) const override;

private:
    AdversarySpec spec_;
};

// RSD-GT deviant that rigs the musical chairs to grab rank 0 and then plays
// honestly.
class RankRigger : public RsdGtPlayer {
public:
    RankRigger(const Config& cfg, Rng rng);
    const char* phase_name() const override { return "rank_rigger"; }
};

// RSD-GT deviant whose reported preferences follow a fake mean vector; with
// deviate set she sits on her true best arm during full exploitation,
// exercising the random inspections.
class PreferenceLiar : public RsdGtPlayer {
public:
    PreferenceLiar(const Config& cfg, Rng rng, const AdversarySpec& spec, const EnvModel& env,
                   int player_index);
    const char* phase_name() const override { return "preference_liar"; }

protected:
    const std::vector<double>& decision_means() const override { return fake_means_; }
    int exploit_arm_override(long t, int assigned) override;

private:
    std::vector<double> fake_means_;
    bool deviate_;
    int true_best_;
};

// Builds the adversary for slot player_index of the given run setup.
// algo names: selfish-robust-mmab | sic-gt | rsd-gt.
std::unique_ptr<Player> make_adversary(const AdversarySpec& spec, const std::string& algo,
                                       const EnvModel& env, int player_index, double beta,
                                       Rng rng);

} // namespace mmab
