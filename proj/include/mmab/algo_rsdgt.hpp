#pragma once

#include <vector>

#include "mmab/algo_sicgt.hpp" // FullSensingInit
#include "mmab/math.hpp"
#include "mmab/player.hpp"
#include "mmab/rng.hpp"

namespace mmab {

// Serial-dictatorship assignment for one block. prefs holds one column per
// player: the ordered best arms of players who already announced them, or an
// all -1 column for players still exploring (those get the exploration
// round-robin arm (t + player + 1) mod K instead). comm_arm is the lowest
// arm left unclaimed by the announced players.
struct RsdAssignment {
    std::vector<int> arm;
    int comm_arm = 0;
};

RsdAssignment rsd_attribution(const std::vector<std::vector<int>>& prefs, int blockowner, long t,
                              int num_arms);

// Punishment feasibility for the delta-heterogeneous setting: requires
// alpha = ((1+delta)/(1-delta))^2 (1-1/K)^(M-1) < 1.
double rsd_punish_alpha(int num_arms, int m_players, double delta);
bool rsd_punish_feasible(int num_arms, int m_players, double delta);

// RSD-GT: full-sensing semi-heterogeneous algorithm. After the shared
// initialization, time splits into superblocks of M blocks of length
// 5K + MK + M^2 K; block j rotates the dictator order to start at player j
// and gives player j the right to broadcast her ordered top-M arms once.
// Exploiters pull their RSD-assigned arm, run random inspections once all
// preferences are known, and fall back to a collective punishment on any
// protocol violation.
class RsdGtPlayer : public Player {
public:
    struct Config {
        int num_arms = 0;
        long horizon = 0;
        double delta = 0.0;     // heterogeneity level fed to the punishment
        int rig_chair_arm = -1; // adversarial rank rigging, -1 = honest
    };

    RsdGtPlayer(const Config& cfg, Rng rng);

    int act(long t) override;
    void observe(const Observation& obs) override;
    const char* phase_name() const override;

    int estimated_m() const { return m_; }
    int rank() const { return rank_; }
    bool punished() const { return punish_; }
    long block_length() const { return block_len_; }
    const std::vector<std::vector<int>>& preferences() const { return prefs_; }

protected:
    // Mean vector driving preference order and the separation test; an
    // adversarial subclass may substitute a fake vector.
    virtual const std::vector<double>& decision_means() const { return means_; }
    // Arm actually pulled while exploiting (honest players pull the
    // assignment).
    virtual int exploit_arm_override(long t, int assigned) { (void)t; return assigned; }

    int rank_ = -1;
    int m_ = 0;

private:
    enum class Mode { Init, Main, PunishWait, CollideTwice, Estimate, Sample, Fallback };
    enum class Sub { Exploring, Exploiting, Listening, PrefSignaling };

    long local_time(long t) const { return t - init_.total_rounds(); }
    long blocktime(long t) const { return local_time(t) % block_len_ + 1; } // 1-based
    int blockowner(long t) const {
        return static_cast<int>((local_time(t) / block_len_) % m_);
    }
    std::vector<int> exploit_players() const;
    int sendbit_arm(long t, bool include_self) const; // first-half collision pattern
    void flag(long t, int reason);
    void enter_listen(long t);
    void finish_block(long t);
    void to_punish_path(long t);
    void begin_estimation(long t);
    bool separation_ok(std::vector<int>* order_out) const;

    Config cfg_;
    Rng rng_;
    Mode mode_ = Mode::Init;
    Sub sub_ = Sub::Exploring;
    FullSensingInit init_;

    long block_len_ = 0;
    double log_t_ = 0.0;
    double inspect_prob_ = 0.0;
    bool punish_ = false;

    std::vector<std::vector<int>> prefs_; // [player][slot], -1 unknown
    std::vector<long> pulls_;
    std::vector<double> value_sum_;
    std::vector<double> means_;

    // Listen / PrefSignal state.
    long listen_entry_bt_ = 0;
    std::vector<int> lambda_;       // decoded or own ordered preferences
    bool repeat_pending_ = false;

    // Exploitation state.
    int consecutive_collisions_ = 0;
    bool inspecting_ = false;
    int inspect_target_ = -1;

    // Punishment state.
    bool signal_this_block_ = false;
    long collide_rounds_left_ = 0;
    std::vector<MultPrecisionState> est_;
    std::vector<double> punish_probs_;

    int pending_arm_ = 0;
    RsdAssignment cur_assign_;
};

} // namespace mmab
