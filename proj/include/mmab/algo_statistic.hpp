#pragma once

#include <vector>

#include "mmab/math.hpp"
#include "mmab/player.hpp"
#include "mmab/rng.hpp"

namespace mmab {

// Closest integer to the player-count estimate implied by the per-arm
// empirical collision probabilities p_hat: 1 + round(log(1 - mean(p_hat)) /
// log(1 - 1/K)), clamped to [1, K]. Sets *clamped when the clamp bites.
int estimate_m_finalize(const std::vector<double>& p_hat, int num_arms, bool* clamped = nullptr);

// Shifted round-robin over the M empirically best arms with randomized
// exploration on the M-th best slot. The cached lists refresh only when
// t = 0 (mod M); between refreshes decisions use the snapshot.
class ExploOne {
public:
    ExploOne(int num_arms, int m_players, int rank, long horizon);

    // Decide this round's pull from the cached snapshot (refreshing it first
    // when due). pulls/means are the caller's lifetime statistics.
    int step(long t, const std::vector<long>& pulls, const std::vector<double>& means, Rng& rng);

    const std::vector<int>& best_list() const { return best_list_; }
    int mth_best_arm() const { return mth_best_; }

private:
    void refresh(long t, const std::vector<long>& pulls, const std::vector<double>& means);

    int num_arms_;
    int m_players_;
    int rank_;
    long horizon_;
    bool initialized_ = false;
    std::vector<int> best_list_;   // top-M arms, ascending arm index
    int mth_best_ = 0;             // arm with the M-th largest cached mean
    double mth_best_mean_ = 0.0;
    std::vector<int> explore_set_; // arms outside the list whose UCB reaches mth_best_mean_
};

struct SelfishRobustMmabConfig {
    int num_arms = 0;
    long horizon = 0;
    double beta = 39.0; // Algorithm default; tests may lower it
};

// Statistic-sensing cooperative player: estimate M from per-arm collision
// frequencies, wait, grab a rank by musical chairs on positive rewards, wait
// again, then run ExploOne to the horizon.
class SelfishRobustMmab : public Player {
public:
    SelfishRobustMmab(const SelfishRobustMmabConfig& cfg, Rng rng);

    int act(long t) override;
    void observe(const Observation& obs) override;
    const char* phase_name() const override;

    int estimated_m() const { return m_hat_; }
    int rank() const { return rank_; }

private:
    enum class Phase { EstimateM, WaitRoom1, GetRank, WaitRoom2, Explo, Fallback };

    void enter(Phase p, long t);

    SelfishRobustMmabConfig cfg_;
    Rng rng_;
    Phase phase_ = Phase::EstimateM;

    double n_threshold_ = 0.0;   // beta^2 K^2 log T
    long rounds_ = 0;            // personal 1-based round counter
    long t_m_ = 0;
    long wait1_end_ = 0;
    long rank_end_ = 0;
    long wait2_end_ = 0;

    std::vector<long> obs_count_;  // |N_k|
    std::vector<long> coll_count_; // |C_k|
    int m_hat_ = 0;
    int rank_ = -1;

    std::vector<long> pulls_;
    std::vector<double> value_sum_;
    std::vector<double> means_;

    ExploOne explo_;
    int pending_arm_ = -1;
};

} // namespace mmab
