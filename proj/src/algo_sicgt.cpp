#include "mmab/algo_sicgt.hpp"

#include <algorithm>
#include <cmath>

#include "mmab/algo_statistic.hpp" // estimate_m_finalize
#include "mmab/commproto.hpp"

namespace mmab {

namespace {
constexpr int kReasonExploreCollision = 1;
constexpr int kReasonEchoMismatch = 2;
constexpr int kReasonLeaderMismatch = 3;
constexpr int kReasonScanHit = 4;
constexpr int kReasonSignalSet = 5;
constexpr int kReasonExploitCollision = 6;
constexpr int kReasonDecodedOverflow = 7;
constexpr int kReasonProtocol = 8;
} // namespace

FullSensingInit::FullSensingInit(int num_arms, long horizon) : num_arms_(num_arms) {
    const double log_t = std::log(static_cast<double>(horizon));
    est_rounds_ = static_cast<long>(std::ceil(12.0 * std::exp(1.0) * num_arms * num_arms * log_t));
    chair_rounds_ = static_cast<long>(std::ceil(num_arms * log_t));
    total_rounds_ = est_rounds_ + chair_rounds_;
}

int FullSensingInit::act(Rng& rng) {
    if (rounds_ < est_rounds_) {
        pending_ = rng.uniform_int(num_arms_);
    } else if (rank_ >= 0) {
        pending_ = rank_;
    } else if (rig_chair_arm >= 0) {
        pending_ = rig_chair_arm;
    } else {
        pending_ = rng.uniform_int(m_hat_);
    }
    return pending_;
}

void FullSensingInit::observe(const Observation& obs) {
    const bool eta = obs.collision.value_or(false);
    if (rounds_ < est_rounds_) {
        if (eta) n_coll_ += 1;
        if (rounds_ + 1 == est_rounds_) {
            const double p_hat =
                static_cast<double>(n_coll_) / static_cast<double>(est_rounds_);
            // Same closest-integer estimate as the statistic-sensing protocol,
            // with the collision probability pooled over all arms.
            std::vector<double> pooled(static_cast<std::size_t>(num_arms_), p_hat);
            m_hat_ = estimate_m_finalize(pooled, num_arms_, &m_clamped_);
        }
    } else if (rank_ < 0 && !eta) {
        rank_ = obs.arm;
    }
    rounds_ += 1;
}

SicGtPlayer::SicGtPlayer(const Config& cfg, Rng rng)
    : cfg_(cfg), rng_(rng), init_(cfg.num_arms, cfg.horizon) {
    init_.rig_chair_arm = cfg.rig_chair_arm;
    log_t_ = std::log(static_cast<double>(cfg_.horizon));
    samples_.assign(static_cast<std::size_t>(cfg_.num_arms), 0);
    sample_sum_.assign(static_cast<std::size_t>(cfg_.num_arms), 0.0);
    send_pairs_.clear();
}

const char* SicGtPlayer::phase_name() const {
    switch (phase_) {
    case Phase::Init: return "init";
    case Phase::Explore: return "explore";
    case Phase::Comm: return "comm";
    case Phase::Exploit: return "exploit";
    case Phase::PunishSignal:
    case Phase::PunishScanWait: return "punish_signal";
    case Phase::Estimate: return "punish_estimate";
    case Phase::Sample: return "punish_sample";
    case Phase::Fallback: return "fallback";
    }
    return "?";
}

long SicGtPlayer::comm_fixed_rounds(int num_arms, int m_players, int p) {
    const long bits = p + 1;
    const long send = static_cast<long>(2 * m_players - 2) * num_arms * 2 * bits;
    const long cross = static_cast<long>(2) * m_players * num_arms * bits;
    return num_arms + send + cross;
}

SicGtPlayer::UpdateDecision SicGtPlayer::update_decide(const std::vector<double>& trimmed,
                                                       const std::vector<int>& active, int m_p,
                                                       double bound) {
    UpdateDecision out;
    const int k_p = static_cast<int>(active.size());
    for (int k : active) {
        int above = 0;
        int below = 0;
        for (int i : active) {
            if (trimmed[static_cast<std::size_t>(i)] - bound >=
                trimmed[static_cast<std::size_t>(k)] + bound) {
                above += 1;
            }
            if (trimmed[static_cast<std::size_t>(k)] - bound >=
                trimmed[static_cast<std::size_t>(i)] + bound) {
                below += 1;
            }
        }
        if (above >= m_p) out.reject.push_back(k);
        else if (below >= k_p - m_p) out.accept.push_back(k);
    }
    return out;
}

void SicGtPlayer::enter(Phase p, long t) {
    phase_ = p;
    log_event(t, EventKind::PhaseChange, static_cast<double>(p));
}

void SicGtPlayer::flag_punish(long t, int reason) {
    if (!punish_) {
        punish_ = true;
        log_event(t, EventKind::PunishTriggered, reason);
    }
}

void SicGtPlayer::setup_explore_phase(long t) {
    (void)t;
    const long windows = static_cast<long>(
        std::ceil(static_cast<double>(active_.size()) * std::ldexp(1.0, p_) / m_p_));
    phase_rounds_left_ = windows * m_;
    phase_round_ = 0;
    phase_updates_.assign(static_cast<std::size_t>(cfg_.num_arms), 0);
}

std::vector<int> SicGtPlayer::arms_to_pull() const {
    // Sliding window over the active arms: window m covers index positions
    // idx with (idx - m * M_p) mod K_p < M_p; accepted arms are always pulled.
    std::vector<int> arms(opt_);
    const int k_p = static_cast<int>(active_.size());
    if (k_p > 0) {
        const long window = phase_round_ / m_;
        for (int idx = 0; idx < k_p; ++idx) {
            long rel = (idx - window * m_p_) % k_p;
            if (rel < 0) rel += k_p;
            if (rel < m_p_) arms.push_back(active_[static_cast<std::size_t>(idx)]);
        }
    }
    std::sort(arms.begin(), arms.end());
    return arms;
}

void SicGtPlayer::setup_comm(long t) {
    enter(Phase::Comm, t);
    log_event(t, EventKind::CommStart, p_);
    stage_ = CommStage::Scan;
    stage_round_ = 0;
    stage_len_ = cfg_.num_arms;

    send_pairs_.clear();
    for (int i = 0; i < m_; ++i) {
        for (int l = 0; l < 2; ++l) {
            if (i != l) send_pairs_.emplace_back(i, l);
        }
    }
    cross_pairs_ = {{0, 1}, {1, 0}};

    vq_.assign(static_cast<std::size_t>(cfg_.num_arms), 0.0);
    for (int k = 0; k < cfg_.num_arms; ++k) {
        const auto sk = static_cast<std::size_t>(k);
        const double mean = samples_[sk] > 0 ? sample_sum_[sk] / static_cast<double>(samples_[sk])
                                             : 0.0;
        vq_[sk] = quantize(std::clamp(mean, 0.0, 1.0), p_, rng_);
    }
    received_.assign(static_cast<std::size_t>(m_),
                     std::vector<double>(static_cast<std::size_t>(cfg_.num_arms), 0.0));
    received_[static_cast<std::size_t>(rank_)] = vq_;
    decision_ = UpdateDecision{};
    sig_index_ = 0;
}

void SicGtPlayer::advance_comm_stage(long t) {
    stage_round_ = 0;
    switch (stage_) {
    case CommStage::Scan:
        stage_ = CommStage::Send;
        stage_len_ = static_cast<long>(send_pairs_.size()) * cfg_.num_arms * 2 * (p_ + 1);
        break;
    case CommStage::Send:
        stage_ = CommStage::Cross;
        stage_len_ = static_cast<long>(cross_pairs_.size()) * m_ * cfg_.num_arms * (p_ + 1);
        break;
    case CommStage::Cross: {
        if (rank_ <= 1) {
            std::vector<double> trimmed(static_cast<std::size_t>(cfg_.num_arms), 0.0);
            for (int k : active_) {
                std::vector<double> vals(static_cast<std::size_t>(m_));
                for (int j = 0; j < m_; ++j) {
                    vals[static_cast<std::size_t>(j)] =
                        received_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
                }
                trimmed[static_cast<std::size_t>(k)] = trimmed_mean(vals);
            }
            const double bound =
                4.0 * std::sqrt(log_t_ / ((m_ - 2) * std::ldexp(1.0, p_ + 1)));
            decision_ = update_decide(trimmed, active_, m_p_, bound);
        }
        stage_ = CommStage::SigCard;
        stage_len_ = cfg_.num_arms;
        sig_len_ = 0;
        sig_len_seen_ = false;
        sig_rx_.clear();
        sig_own_ = sig_index_ == 0 ? decision_.accept : decision_.reject;
        break;
    }
    case CommStage::SigCard:
        if (rank_ <= 1) sig_len_ = static_cast<int>(sig_own_.size());
        stage_ = CommStage::SigElems;
        stage_len_ = static_cast<long>(sig_len_) * cfg_.num_arms;
        break;
    case CommStage::SigElems: {
        if (rank_ > 1) {
            if (static_cast<int>(sig_rx_.size()) != sig_len_) flag_punish(t, kReasonSignalSet);
            auto& target = sig_index_ == 0 ? decision_.accept : decision_.reject;
            target = sig_rx_;
            std::sort(target.begin(), target.end());
        }
        if (sig_index_ == 0) {
            sig_index_ = 1;
            stage_ = CommStage::SigCard;
            stage_len_ = cfg_.num_arms;
            sig_len_ = 0;
            sig_len_seen_ = false;
            sig_rx_.clear();
            sig_own_ = decision_.reject;
        } else {
            stage_ = CommStage::Done;
            stage_len_ = 0;
        }
        break;
    }
    case CommStage::Done:
        break;
    }
    if (stage_ != CommStage::Done && stage_len_ == 0) advance_comm_stage(t);
    if (stage_ == CommStage::Done) finish_comm(t);
}

int SicGtPlayer::comm_act(long t) {
    const int K = cfg_.num_arms;
    switch (stage_) {
    case CommStage::Scan:
        return scan_arm(t, rank_, K);
    case CommStage::Send: {
        const long per_tuple = 2L * (p_ + 1);
        const long tuple = stage_round_ / per_tuple;
        const long within = stage_round_ % per_tuple;
        const int leg = static_cast<int>(within / (p_ + 1));
        const int bit = static_cast<int>(within % (p_ + 1));
        const int k = static_cast<int>(tuple % K);
        const auto [i, l] = send_pairs_[static_cast<std::size_t>(tuple / K)];
        if (rank_ == i) {
            if (leg == 0) {
                if (bit == 0) {
                    tx_value_ = value_to_send(k, l);
                    tx_bits_ = BitMessage::encode(tx_value_, p_).bits;
                }
                return tx_bits_[static_cast<std::size_t>(bit)] ? l : rank_;
            }
            if (bit == 0) rx_bits_.assign(static_cast<std::size_t>(p_) + 1, 0);
            return rank_; // listening for the echo
        }
        if (rank_ == l) {
            if (leg == 0) {
                if (bit == 0) rx_bits_.assign(static_cast<std::size_t>(p_) + 1, 0);
                return rank_; // listening
            }
            return rx_bits_[static_cast<std::size_t>(bit)] ? i : rank_; // echo back
        }
        const int jam = jam_override(CommSlot{p_, i, l, k, leg, bit});
        return jam >= 0 ? jam : rank_;
    }
    case CommStage::Cross: {
        const long idx = stage_round_ / (p_ + 1);
        const int bit = static_cast<int>(stage_round_ % (p_ + 1));
        const int k = static_cast<int>(idx % K);
        const int mm = static_cast<int>((idx / K) % m_);
        const auto [i, l] = cross_pairs_[static_cast<std::size_t>(idx / (static_cast<long>(K) * m_))];
        if (rank_ == i) {
            if (bit == 0) {
                tx_value_ = received_[static_cast<std::size_t>(mm)][static_cast<std::size_t>(k)];
                tx_bits_ = BitMessage::encode(tx_value_, p_).bits;
            }
            return tx_bits_[static_cast<std::size_t>(bit)] ? l : rank_;
        }
        if (rank_ == l) {
            if (bit == 0) rx_bits_.assign(static_cast<std::size_t>(p_) + 1, 0);
            return rank_;
        }
        const int jam = jam_override(CommSlot{p_, i, l, k, 0, bit});
        return jam >= 0 ? jam : rank_;
    }
    case CommStage::SigCard:
        if (rank_ <= 1) {
            return sig_own_.empty() ? scan_arm(t, rank_, K)
                                    : static_cast<int>(sig_own_.size()) - 1;
        }
        return scan_arm(t, rank_, K);
    case CommStage::SigElems:
        if (rank_ <= 1) {
            const long block = stage_round_ / K;
            return block < static_cast<long>(sig_own_.size())
                       ? sig_own_[static_cast<std::size_t>(block)]
                       : scan_arm(t, rank_, K);
        }
        return scan_arm(t, rank_, K);
    case CommStage::Done:
        break;
    }
    return rank_;
}

void SicGtPlayer::comm_observe(const Observation& obs) {
    const bool eta = obs.collision.value_or(false);
    const long t = obs.round;
    switch (stage_) {
    case CommStage::Scan:
        if (eta) flag_punish(t, kReasonScanHit);
        break;
    case CommStage::Send: {
        const long per_tuple = 2L * (p_ + 1);
        const long tuple = stage_round_ / per_tuple;
        const long within = stage_round_ % per_tuple;
        const int leg = static_cast<int>(within / (p_ + 1));
        const int bit = static_cast<int>(within % (p_ + 1));
        const int k = static_cast<int>(tuple % cfg_.num_arms);
        const auto [i, l] = send_pairs_[static_cast<std::size_t>(tuple / cfg_.num_arms)];
        const bool last_bit = bit == p_;
        if (rank_ == l && leg == 0) {
            if (eta) rx_bits_[static_cast<std::size_t>(bit)] = 1;
            if (last_bit) {
                double v = BitMessage{rx_bits_}.value();
                if (v > 1.0) {
                    flag_punish(t, kReasonDecodedOverflow);
                    v = 1.0;
                }
                received_[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = v;
            }
        } else if (rank_ == i && leg == 1) {
            if (eta) rx_bits_[static_cast<std::size_t>(bit)] = 1;
            if (last_bit && rx_bits_ != tx_bits_) flag_punish(t, kReasonEchoMismatch);
        }
        break;
    }
    case CommStage::Cross: {
        const long idx = stage_round_ / (p_ + 1);
        const int bit = static_cast<int>(stage_round_ % (p_ + 1));
        const int k = static_cast<int>(idx % cfg_.num_arms);
        const int mm = static_cast<int>((idx / cfg_.num_arms) % m_);
        const auto [i, l] =
            cross_pairs_[static_cast<std::size_t>(idx / (static_cast<long>(cfg_.num_arms) * m_))];
        (void)i;
        if (rank_ == l) {
            if (eta) rx_bits_[static_cast<std::size_t>(bit)] = 1;
            if (bit == p_) {
                const double v = BitMessage{rx_bits_}.value();
                if (v != received_[static_cast<std::size_t>(mm)][static_cast<std::size_t>(k)]) {
                    flag_punish(t, kReasonLeaderMismatch);
                }
            }
        }
        break;
    }
    case CommStage::SigCard:
        if (rank_ > 1 && eta) {
            if (sig_len_seen_) {
                flag_punish(t, kReasonSignalSet);
            } else {
                sig_len_seen_ = true;
                sig_len_ = obs.arm + 1;
            }
        }
        break;
    case CommStage::SigElems:
        if (rank_ > 1 && eta) {
            if (std::find(sig_rx_.begin(), sig_rx_.end(), obs.arm) == sig_rx_.end()) {
                sig_rx_.push_back(obs.arm);
            }
        }
        break;
    case CommStage::Done:
        break;
    }
    stage_round_ += 1;
    if (stage_round_ >= stage_len_) advance_comm_stage(t);
}

void SicGtPlayer::finish_comm(long t) {
    log_event(t, EventKind::CommEnd, p_);
    std::vector<int> next_active;
    for (int k : active_) {
        const bool acc = std::find(decision_.accept.begin(), decision_.accept.end(), k) !=
                         decision_.accept.end();
        const bool rej = std::find(decision_.reject.begin(), decision_.reject.end(), k) !=
                         decision_.reject.end();
        if (!acc && !rej) next_active.push_back(k);
        if (acc) opt_.push_back(k);
    }
    std::sort(opt_.begin(), opt_.end());
    active_ = std::move(next_active);
    m_p_ = m_ - static_cast<int>(opt_.size());
    p_ += 1;

    if (punish_) {
        start_punishment(t);
        return;
    }
    if (m_p_ == 0) {
        enter(Phase::Exploit, t);
        log_event(t, EventKind::ExploitStart);
        return;
    }
    if (active_.empty() || m_p_ < 0 || static_cast<int>(active_.size()) < m_p_) {
        log_event(t, EventKind::ProtocolFailure, kReasonProtocol);
        enter(Phase::Fallback, t);
        return;
    }
    setup_explore_phase(t);
    enter(Phase::Explore, t);
}

void SicGtPlayer::start_punishment(long t) {
    log_event(t, EventKind::PunishSignal);
    if (m_p_ == 0 || active_.empty()) {
        if (opt_.empty()) { // corrupted set decode left nothing to signal on
            begin_estimation(t);
            return;
        }
        // Exploitation context: the head of the rotation is the first
        // accepted arm; M rounds there collide with every cooperative player.
        signal_rounds_left_ = m_;
        phase_rounds_left_ = 0;
        enter(Phase::PunishSignal, t);
        return;
    }
    setup_explore_phase(t);
    signal_rounds_left_ = m_;
    enter(Phase::PunishSignal, t);
}

void SicGtPlayer::begin_estimation(long t) {
    const double gamma = std::pow(1.0 - 1.0 / cfg_.num_arms, m_ - 1);
    const double delta = (1.0 - gamma) / (1.0 + 3.0 * gamma);
    est_.assign(static_cast<std::size_t>(cfg_.num_arms), MultPrecisionState(delta, log_t_));
    enter(Phase::Estimate, t);
}

double SicGtPlayer::value_to_send(int arm, int leader) const {
    (void)leader;
    return vq_[static_cast<std::size_t>(arm)];
}

int SicGtPlayer::act(long t) {
    switch (phase_) {
    case Phase::Init:
        pending_arm_ = init_.act(rng_);
        break;
    case Phase::Explore: {
        const std::vector<int> arms = arms_to_pull();
        pending_arm_ = arms[static_cast<std::size_t>((t + rank_ + 1) % m_)];
        break;
    }
    case Phase::Comm:
        pending_arm_ = comm_act(t);
        break;
    case Phase::Exploit:
        pending_arm_ = opt_[static_cast<std::size_t>((t + rank_ + 1) % m_)];
        break;
    case Phase::PunishSignal:
        pending_arm_ = (m_p_ == 0 || active_.empty()) ? opt_.front() : arms_to_pull().front();
        break;
    case Phase::PunishScanWait:
        pending_arm_ = rank_;
        break;
    case Phase::Estimate:
        pending_arm_ = scan_arm(t, rank_, cfg_.num_arms);
        break;
    case Phase::Sample: {
        const double u = rng_.uniform01();
        double acc = 0.0;
        pending_arm_ = cfg_.num_arms - 1;
        for (int k = 0; k < cfg_.num_arms; ++k) {
            acc += punish_probs_[static_cast<std::size_t>(k)];
            if (u < acc) {
                pending_arm_ = k;
                break;
            }
        }
        break;
    }
    case Phase::Fallback:
        pending_arm_ = rng_.uniform_int(cfg_.num_arms);
        break;
    }
    return pending_arm_;
}

void SicGtPlayer::observe(const Observation& obs) {
    const long t = obs.round;
    switch (phase_) {
    case Phase::Init:
        init_.observe(obs);
        if (init_.done()) {
            m_ = init_.m_hat();
            rank_ = init_.rank();
            log_event(t, EventKind::EstimatedM, m_, init_.m_clamped() ? 1.0 : 0.0);
            log_event(t, EventKind::InitEnd);
            if (rank_ < 0) {
                log_event(t, EventKind::RankFallback);
                enter(Phase::Fallback, t);
                break;
            }
            log_event(t, EventKind::RankFixed, rank_);
            if (m_ < 3) {
                // Trimmed-mean communication needs at least 3 players.
                log_event(t, EventKind::ProtocolFailure, kReasonProtocol);
                enter(Phase::Fallback, t);
                break;
            }
            active_.resize(static_cast<std::size_t>(cfg_.num_arms));
            for (int k = 0; k < cfg_.num_arms; ++k) active_[static_cast<std::size_t>(k)] = k;
            opt_.clear();
            m_p_ = m_;
            p_ = 1;
            setup_explore_phase(t);
            enter(Phase::Explore, t);
        }
        break;
    case Phase::Explore: {
        const int k = obs.arm;
        const auto sk = static_cast<std::size_t>(k);
        const bool active = std::find(active_.begin(), active_.end(), k) != active_.end();
        if (active && phase_updates_[sk] < (1L << p_)) {
            phase_updates_[sk] += 1;
            samples_[sk] += 1;
            sample_sum_[sk] += obs.value.value_or(0.0);
        }
        const bool was_punishing = punish_;
        if (obs.collision.value_or(false)) flag_punish(t, kReasonExploreCollision);
        phase_round_ += 1;
        phase_rounds_left_ -= 1;
        if (punish_ && !was_punishing) {
            log_event(t, EventKind::PunishSignal);
            if (phase_rounds_left_ >= m_) {
                signal_rounds_left_ = m_;
                enter(Phase::PunishSignal, t);
            } else {
                signal_rounds_left_ = phase_rounds_left_ + cfg_.num_arms;
                enter(Phase::PunishScanWait, t);
            }
            break;
        }
        if (phase_rounds_left_ == 0) setup_comm(t);
        break;
    }
    case Phase::Comm:
        comm_observe(obs);
        break;
    case Phase::Exploit:
        if (obs.collision.value_or(false)) {
            flag_punish(t, kReasonExploitCollision);
            start_punishment(t);
        }
        break;
    case Phase::PunishSignal:
        phase_round_ += 1;
        signal_rounds_left_ -= 1;
        if (signal_rounds_left_ == 0) begin_estimation(t);
        break;
    case Phase::PunishScanWait:
        signal_rounds_left_ -= 1;
        if (signal_rounds_left_ == 0) begin_estimation(t);
        break;
    case Phase::Estimate: {
        auto& st = est_[static_cast<std::size_t>(obs.arm)];
        if (!st.stopped()) st.step(obs.value.value_or(0.0));
        bool all_stopped = true;
        for (const auto& e : est_) {
            if (!e.stopped()) {
                all_stopped = false;
                break;
            }
        }
        if (all_stopped) {
            std::vector<double> means(static_cast<std::size_t>(cfg_.num_arms));
            for (int k = 0; k < cfg_.num_arms; ++k) {
                means[static_cast<std::size_t>(k)] = est_[static_cast<std::size_t>(k)].mean();
            }
            const double gamma = std::pow(1.0 - 1.0 / cfg_.num_arms, m_ - 1);
            punish_probs_ = punishment_probs(means, m_, gamma);
            log_event(t, EventKind::EstimationDone);
            log_event(t, EventKind::SamplingStart);
            enter(Phase::Sample, t);
        }
        break;
    }
    case Phase::Sample:
    case Phase::Fallback:
        break;
    }
}

} // namespace mmab
