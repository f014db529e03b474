#pragma once

#include <memory>
#include <vector>

#include "mmab/math.hpp"
#include "mmab/player.hpp"
#include "mmab/rng.hpp"

namespace mmab {

// Shared full-sensing initialization: uniform play for ceil(12 e K^2 log T)
// rounds to estimate M from the collision frequency, then musical chairs over
// the first M_hat arms for ceil(K log T) rounds to fix a rank.
class FullSensingInit {
public:
    FullSensingInit(int num_arms, long horizon);

    bool done() const { return rounds_ >= total_rounds_; }
    int act(Rng& rng);
    void observe(const Observation& obs);

    int m_hat() const { return m_hat_; }
    int rank() const { return rank_; }
    bool m_clamped() const { return m_clamped_; }
    long estimation_rounds() const { return est_rounds_; }
    long chair_rounds() const { return chair_rounds_; }
    long total_rounds() const { return total_rounds_; }

    // Musical-chairs squat target for rank-rigging adversaries (-1 = honest).
    int rig_chair_arm = -1;

private:
    int num_arms_;
    long est_rounds_;
    long chair_rounds_;
    long total_rounds_;
    long rounds_ = 0;
    long n_coll_ = 0;
    int m_hat_ = 0;
    bool m_clamped_ = false;
    int rank_ = -1;
    int pending_ = 0;
};

// SIC-GT: full-sensing homogeneous algorithm. Alternates collision-free
// exploration with collision-coded communication to two leaders, trims the
// gathered means, accepts/rejects arms, and exploits the accepted set in a
// rotating fashion. Any detected deviation trips a grim-trigger punishment.
class SicGtPlayer : public Player {
public:
    struct Config {
        int num_arms = 0;
        long horizon = 0;
        int rig_chair_arm = -1; // adversarial rank rigging, -1 = honest
    };

    SicGtPlayer(const Config& cfg, Rng rng);

    int act(long t) override;
    void observe(const Observation& obs) override;
    const char* phase_name() const override;

    int estimated_m() const { return m_; }
    int rank() const { return rank_; }
    bool punished() const { return punish_; }
    const std::vector<int>& optimal_arms() const { return opt_; }
    int comm_phase() const { return p_; }

    // Deterministic round cost of the p-th communication phase before the two
    // set broadcasts, given M players and K arms (scan + sends + cross-check).
    static long comm_fixed_rounds(int num_arms, int m_players, int p);

    // Accept/reject decision from trimmed means over the active arms.
    struct UpdateDecision {
        std::vector<int> accept;
        std::vector<int> reject;
    };
    static UpdateDecision update_decide(const std::vector<double>& trimmed,
                                        const std::vector<int>& active, int m_p, double bound);

protected:
    // Quantized value this player transmits for `arm` to `leader` (0 or 1).
    // Adversarial subclasses may lie, possibly differently per leader.
    virtual double value_to_send(int arm, int leader) const;

    struct CommSlot {
        int phase = 0;
        int sender = 0;
        int receiver = 0;
        int arm = 0;
        int leg = 0; // 0 = send, 1 = echo
        int bit = 0;
    };
    // Bystander override during others' transfers: return an arm to pull to
    // jam this slot, or -1 to wait on the own rank arm.
    virtual int jam_override(const CommSlot& slot) const { (void)slot; return -1; }

    int rank_ = -1;

private:
    enum class Phase {
        Init,
        Explore,
        Comm,
        Exploit,
        PunishSignal,   // M rounds on the head of ArmstoPull
        PunishScanWait, // rank arm through the next punish scan
        Estimate,
        Sample,
        Fallback,
    };

    enum class CommStage { Scan, Send, Cross, SigCard, SigElems, Done };

    void enter(Phase p, long t);
    void flag_punish(long t, int reason);
    void start_punishment(long t);
    void setup_explore_phase(long t);
    std::vector<int> arms_to_pull() const;
    void setup_comm(long t);
    void advance_comm_stage(long t);
    int comm_act(long t);
    void comm_observe(const Observation& obs);
    void finish_comm(long t);
    void begin_estimation(long t);

    Config cfg_;
    Rng rng_;
    Phase phase_ = Phase::Init;
    FullSensingInit init_;

    int m_ = 0;
    bool punish_ = false;
    long horizon_log_ = 0; // cached log(T)
    double log_t_ = 0.0;

    // Exploration bookkeeping.
    int p_ = 1;                      // phase counter
    std::vector<int> active_;        // arms still explored, ascending
    std::vector<int> opt_;           // accepted arms, ascending
    int m_p_ = 0;                    // M - |opt_|
    long phase_rounds_left_ = 0;
    long phase_round_ = 0;           // rounds since exploration phase start
    std::vector<int> phase_updates_; // capped per-phase sample counts
    std::vector<long> samples_;      // lifetime capped pull counts
    std::vector<double> sample_sum_;

    // Communication bookkeeping.
    CommStage stage_ = CommStage::Scan;
    long stage_round_ = 0;
    long stage_len_ = 0;
    std::vector<std::pair<int, int>> send_pairs_;
    std::vector<std::pair<int, int>> cross_pairs_;
    std::vector<double> vq_;                    // own quantized means
    std::vector<std::vector<double>> received_; // [player][arm], leaders fill all rows
    std::vector<std::uint8_t> rx_bits_;
    double tx_value_ = 0.0;
    std::vector<std::uint8_t> tx_bits_;
    int sig_index_ = 0;    // 0 = accept set, 1 = reject set
    int sig_len_ = 0;      // decoded (non-leaders) or own (leaders) cardinality
    bool sig_len_seen_ = false;
    std::vector<int> sig_own_;   // leader's set, sorted
    std::vector<int> sig_rx_;    // scanner's decoded elements
    UpdateDecision decision_;

    // Punishment bookkeeping.
    long signal_rounds_left_ = 0;
    std::vector<MultPrecisionState> est_;
    std::vector<double> punish_probs_;

    int pending_arm_ = 0;
};

} // namespace mmab
