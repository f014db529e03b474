#include "mmab/algo_statistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mmab {

namespace {
constexpr double kGamma1 = 13.0 / 14.0;
constexpr double kGamma2 = 16.0 / 15.0;
} // namespace

int estimate_m_finalize(const std::vector<double>& p_hat, int num_arms, bool* clamped) {
    double sum = 0.0;
    for (double p : p_hat) sum += p;
    const double inside = 1.0 - sum / static_cast<double>(num_arms);
    double est;
    if (inside <= 0.0) {
        est = std::numeric_limits<double>::infinity();
    } else {
        est = 1.0 + std::floor(std::log(inside) / std::log(1.0 - 1.0 / num_arms) + 0.5);
    }
    int m = static_cast<int>(std::clamp(est, 1.0, static_cast<double>(num_arms)));
    if (clamped) *clamped = est < 1.0 || est > static_cast<double>(num_arms);
    return m;
}

ExploOne::ExploOne(int num_arms, int m_players, int rank, long horizon)
    : num_arms_(num_arms), m_players_(m_players), rank_(rank), horizon_(horizon) {}

void ExploOne::refresh(long t, const std::vector<long>& pulls, const std::vector<double>& means) {
    // Top-M arms by cached mean, ties to the lowest arm index.
    std::vector<int> order(static_cast<std::size_t>(num_arms_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return means[static_cast<std::size_t>(a)] > means[static_cast<std::size_t>(b)];
    });
    best_list_.assign(order.begin(), order.begin() + m_players_);
    mth_best_ = best_list_.back();
    std::sort(best_list_.begin(), best_list_.end());
    mth_best_mean_ = means[static_cast<std::size_t>(mth_best_)];

    // b_k >= mu_mth iff pulls * kl(mu_k, mu_mth) <= f(t), by monotonicity of
    // the index in its budget; avoids solving for the index itself.
    explore_set_.clear();
    const double budget = explo_budget(static_cast<double>(t + 1));
    for (int k = 0; k < num_arms_; ++k) {
        if (std::find(best_list_.begin(), best_list_.end(), k) != best_list_.end()) continue;
        const double mu = std::min(means[static_cast<std::size_t>(k)], 1.0);
        const double target = std::max(mu, std::min(mth_best_mean_, 1.0));
        const double kl = bernoulli_kl(mu, target);
        if (static_cast<double>(pulls[static_cast<std::size_t>(k)]) * kl <= budget) {
            explore_set_.push_back(k);
        }
    }
}

int ExploOne::step(long t, const std::vector<long>& pulls, const std::vector<double>& means,
                   Rng& rng) {
    if (!initialized_ || t % m_players_ == 0) {
        refresh(t, pulls, means);
        initialized_ = true;
    }
    const int slot = static_cast<int>((t + rank_ + 1) % m_players_);
    const int scheduled = best_list_[static_cast<std::size_t>(slot)];
    if (scheduled != mth_best_) return scheduled;
    if (explore_set_.empty()) return scheduled;
    if (rng.bernoulli(0.5)) return scheduled;
    return explore_set_[static_cast<std::size_t>(rng.uniform_int(
        static_cast<int>(explore_set_.size())))];
}

SelfishRobustMmab::SelfishRobustMmab(const SelfishRobustMmabConfig& cfg, Rng rng)
    : cfg_(cfg), rng_(rng), explo_(cfg.num_arms, 1, 0, cfg.horizon) {
    const int K = cfg_.num_arms;
    n_threshold_ = cfg_.beta * cfg_.beta * static_cast<double>(K) * static_cast<double>(K) *
                   std::log(static_cast<double>(cfg_.horizon));
    obs_count_.assign(static_cast<std::size_t>(K), 0);
    coll_count_.assign(static_cast<std::size_t>(K), 0);
    pulls_.assign(static_cast<std::size_t>(K), 0);
    value_sum_.assign(static_cast<std::size_t>(K), 0.0);
    means_.assign(static_cast<std::size_t>(K), 0.0);
}

const char* SelfishRobustMmab::phase_name() const {
    switch (phase_) {
    case Phase::EstimateM: return "estimate_m";
    case Phase::WaitRoom1: return "wait_room_1";
    case Phase::GetRank: return "get_rank";
    case Phase::WaitRoom2: return "wait_room_2";
    case Phase::Explo: return "explo";
    case Phase::Fallback: return "fallback";
    }
    return "?";
}

void SelfishRobustMmab::enter(Phase p, long t) {
    phase_ = p;
    log_event(t, EventKind::PhaseChange, static_cast<double>(p));
}

int SelfishRobustMmab::act(long t) {
    const int K = cfg_.num_arms;
    switch (phase_) {
    case Phase::EstimateM:
    case Phase::WaitRoom1:
        pending_arm_ = rng_.uniform_int(K);
        break;
    case Phase::GetRank:
        pending_arm_ = rank_ >= 0 ? rank_ : rng_.uniform_int(m_hat_);
        break;
    case Phase::WaitRoom2:
        pending_arm_ = rank_ >= 0 ? rank_ : rng_.uniform_int(K);
        break;
    case Phase::Explo:
        pending_arm_ = explo_.step(t, pulls_, means_, rng_);
        break;
    case Phase::Fallback:
        pending_arm_ = rng_.uniform_int(K);
        break;
    }
    return pending_arm_;
}

void SelfishRobustMmab::observe(const Observation& obs) {
    const int k = obs.arm;
    const double x = obs.value.value_or(obs.reward);
    rounds_ += 1;
    pulls_[static_cast<std::size_t>(k)] += 1;
    value_sum_[static_cast<std::size_t>(k)] += x;
    means_[static_cast<std::size_t>(k)] =
        value_sum_[static_cast<std::size_t>(k)] /
        static_cast<double>(pulls_[static_cast<std::size_t>(k)]);

    switch (phase_) {
    case Phase::EstimateM: {
        if (x > 0.0) {
            obs_count_[static_cast<std::size_t>(k)] += 1;
            if (obs.collision.value_or(false)) coll_count_[static_cast<std::size_t>(k)] += 1;
        }
        const long min_obs = *std::min_element(obs_count_.begin(), obs_count_.end());
        if (static_cast<double>(min_obs) >= n_threshold_) {
            t_m_ = rounds_;
            std::vector<double> p_hat(static_cast<std::size_t>(cfg_.num_arms));
            for (int a = 0; a < cfg_.num_arms; ++a) {
                p_hat[static_cast<std::size_t>(a)] =
                    static_cast<double>(coll_count_[static_cast<std::size_t>(a)]) /
                    static_cast<double>(obs_count_[static_cast<std::size_t>(a)]);
            }
            bool clamped = false;
            m_hat_ = estimate_m_finalize(p_hat, cfg_.num_arms, &clamped);
            log_event(obs.round, EventKind::EstimatedM, m_hat_, clamped ? 1.0 : 0.0);

            wait1_end_ = static_cast<long>(std::ceil(kGamma2 / kGamma1 * static_cast<double>(t_m_)));
            const double rank_rounds = static_cast<double>(t_m_) *
                                       std::log(static_cast<double>(cfg_.horizon)) /
                                       (kGamma1 * n_threshold_);
            rank_end_ = wait1_end_ + static_cast<long>(std::ceil(rank_rounds));
            wait2_end_ = std::max(
                rank_end_,
                static_cast<long>(std::ceil(
                    (kGamma2 / (kGamma1 * kGamma1 * cfg_.beta * cfg_.beta *
                                static_cast<double>(cfg_.num_arms) * cfg_.num_arms) +
                     kGamma2 * kGamma2 / (kGamma1 * kGamma1)) *
                    static_cast<double>(t_m_))));
            enter(rounds_ < wait1_end_ ? Phase::WaitRoom1 : Phase::GetRank, obs.round);
        }
        break;
    }
    case Phase::WaitRoom1:
        if (rounds_ >= wait1_end_) enter(Phase::GetRank, obs.round);
        break;
    case Phase::GetRank:
        if (rank_ < 0 && obs.reward > 0.0) {
            rank_ = k;
            log_event(obs.round, EventKind::RankFixed, rank_);
        }
        if (rounds_ >= rank_end_) {
            if (rank_ < 0) {
                log_event(obs.round, EventKind::RankFallback);
                enter(Phase::Fallback, obs.round);
            } else {
                enter(Phase::WaitRoom2, obs.round);
            }
        }
        break;
    case Phase::WaitRoom2:
        if (rounds_ >= wait2_end_) {
            explo_ = ExploOne(cfg_.num_arms, m_hat_, rank_, cfg_.horizon);
            enter(Phase::Explo, obs.round);
        }
        break;
    case Phase::Explo:
    case Phase::Fallback:
        break;
    }
}

} // namespace mmab
