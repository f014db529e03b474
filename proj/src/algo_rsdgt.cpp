#include "mmab/algo_rsdgt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mmab/commproto.hpp"

namespace mmab {

namespace {
constexpr int kReasonAlreadySent = 1;
constexpr int kReasonPunishScanHit = 2;
constexpr int kReasonTwoSignals = 3;
constexpr int kReasonRepeatMismatch = 4;
constexpr int kReasonIncomplete = 5;
constexpr int kReasonLateCollision = 6;
constexpr int kReasonLiarCaught = 7;
constexpr int kReasonTwoInARow = 8;
constexpr int kReasonProtocol = 9;
} // namespace

RsdAssignment rsd_attribution(const std::vector<std::vector<int>>& prefs, int blockowner, long t,
                              int num_arms) {
    const int m = static_cast<int>(prefs.size());
    RsdAssignment out;
    out.arm.assign(static_cast<std::size_t>(m), -1);
    std::set<int> taken;
    for (int s = 0; s < m; ++s) {
        const int dict = (blockowner + s) % m;
        const auto& col = prefs[static_cast<std::size_t>(dict)];
        if (!col.empty() && col.front() >= 0) {
            std::set<int> distinct(col.begin(), col.end());
            if (static_cast<int>(distinct.size()) != m) {
                throw std::invalid_argument("rsd_attribution: preference column must hold " +
                                            std::to_string(m) + " distinct arms");
            }
            int chosen = -1;
            for (int a : col) {
                if (taken.find(a) == taken.end()) {
                    chosen = a;
                    break;
                }
            }
            out.arm[static_cast<std::size_t>(dict)] = chosen;
            taken.insert(chosen);
        } else {
            out.arm[static_cast<std::size_t>(dict)] =
                static_cast<int>((t + dict + 1) % num_arms);
        }
    }
    out.comm_arm = 0;
    while (taken.count(out.comm_arm) != 0) out.comm_arm += 1;
    return out;
}

double rsd_punish_alpha(int num_arms, int m_players, double delta) {
    const double ratio = (1.0 + delta) / (1.0 - delta);
    return ratio * ratio * std::pow(1.0 - 1.0 / num_arms, m_players - 1);
}

bool rsd_punish_feasible(int num_arms, int m_players, double delta) {
    return rsd_punish_alpha(num_arms, m_players, delta) < 1.0;
}

RsdGtPlayer::RsdGtPlayer(const Config& cfg, Rng rng)
    : cfg_(cfg), rng_(rng), init_(cfg.num_arms, cfg.horizon) {
    init_.rig_chair_arm = cfg.rig_chair_arm;
    log_t_ = std::log(static_cast<double>(cfg_.horizon));
    inspect_prob_ = std::sqrt(log_t_) / static_cast<double>(cfg_.horizon);
    pulls_.assign(static_cast<std::size_t>(cfg_.num_arms), 0);
    value_sum_.assign(static_cast<std::size_t>(cfg_.num_arms), 0.0);
    means_.assign(static_cast<std::size_t>(cfg_.num_arms), 0.0);
}

const char* RsdGtPlayer::phase_name() const {
    switch (mode_) {
    case Mode::Init: return "init";
    case Mode::Main:
        switch (sub_) {
        case Sub::Exploring: return "explore";
        case Sub::Exploiting: return "exploit";
        case Sub::Listening: return "listen";
        case Sub::PrefSignaling: return "pref_signal";
        }
        return "?";
    case Mode::PunishWait:
    case Mode::CollideTwice: return "punish_signal";
    case Mode::Estimate: return "punish_estimate";
    case Mode::Sample: return "punish_sample";
    case Mode::Fallback: return "fallback";
    }
    return "?";
}

std::vector<int> RsdGtPlayer::exploit_players() const {
    std::vector<int> out;
    for (int i = 0; i < m_; ++i) {
        if (prefs_[static_cast<std::size_t>(i)].front() >= 0) out.push_back(i);
    }
    return out;
}

int RsdGtPlayer::sendbit_arm(long t, bool include_self) const {
    std::vector<int> exploiters = exploit_players();
    if (!include_self) {
        exploiters.erase(std::remove(exploiters.begin(), exploiters.end(), rank_),
                         exploiters.end());
    }
    const int target = exploiters.empty() ? rank_ : exploiters.front();
    return scan_arm(t, target, cfg_.num_arms);
}

void RsdGtPlayer::flag(long t, int reason) {
    if (!punish_) {
        punish_ = true;
        log_event(t, EventKind::PunishTriggered, reason);
    }
}

bool RsdGtPlayer::separation_ok(std::vector<int>* order_out) const {
    const std::vector<double>& mu = decision_means();
    std::vector<int> order(static_cast<std::size_t>(cfg_.num_arms));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return mu[static_cast<std::size_t>(a)] > mu[static_cast<std::size_t>(b)];
    });
    auto radius = [&](int arm) {
        const long n = pulls_[static_cast<std::size_t>(arm)];
        if (n <= 0) return std::numeric_limits<double>::infinity();
        return std::sqrt(2.0 * log_t_ / static_cast<double>(n));
    };
    for (int k = 0; k < m_; ++k) {
        const int a = order[static_cast<std::size_t>(k)];
        const int b = order[static_cast<std::size_t>(k + 1)];
        if (!(mu[static_cast<std::size_t>(a)] - radius(a) >=
              mu[static_cast<std::size_t>(b)] + radius(b))) {
            return false;
        }
    }
    if (order_out) order_out->assign(order.begin(), order.begin() + m_);
    return true;
}

void RsdGtPlayer::enter_listen(long t) {
    sub_ = Sub::Listening;
    listen_entry_bt_ = blocktime(t);
    lambda_.assign(static_cast<std::size_t>(m_), -1);
    log_event(t, EventKind::ListenStart, blockowner(t));
    if (prefs_[static_cast<std::size_t>(blockowner(t))].front() >= 0) {
        flag(t, kReasonAlreadySent); // this player already sent
    }
}

void RsdGtPlayer::to_punish_path(long t) {
    if (m_ == 1) {
        log_event(t, EventKind::PunishSignal);
        begin_estimation(t);
        return;
    }
    if (static_cast<int>(exploit_players().size()) == m_) {
        // Everyone sits on a deterministic arm: collide with each player twice.
        mode_ = Mode::CollideTwice;
        collide_rounds_left_ = 2L * (m_ - 1);
    } else {
        mode_ = Mode::PunishWait;
        signal_this_block_ = blocktime(t) <= 3L * cfg_.num_arms;
    }
    log_event(t, EventKind::PunishSignal);
}

void RsdGtPlayer::begin_estimation(long t) {
    const double alpha = rsd_punish_alpha(cfg_.num_arms, m_, cfg_.delta);
    if (alpha >= 1.0) {
        log_event(t, EventKind::ProtocolFailure, kReasonProtocol);
        mode_ = Mode::Fallback;
        return;
    }
    const double dprime = (1.0 - alpha) / (1.0 + 3.0 * alpha);
    est_.assign(static_cast<std::size_t>(cfg_.num_arms), MultPrecisionState(dprime, log_t_));
    mode_ = Mode::Estimate;
}

int RsdGtPlayer::act(long t) {
    const int K = cfg_.num_arms;
    switch (mode_) {
    case Mode::Init:
        pending_arm_ = init_.act(rng_);
        return pending_arm_;
    case Mode::Fallback:
        pending_arm_ = rng_.uniform_int(K);
        return pending_arm_;
    case Mode::Estimate:
        pending_arm_ = scan_arm(t, rank_, K);
        return pending_arm_;
    case Mode::Sample: {
        const double u = rng_.uniform01();
        double acc = 0.0;
        pending_arm_ = K - 1;
        for (int k = 0; k < K; ++k) {
            acc += punish_probs_[static_cast<std::size_t>(k)];
            if (u < acc) {
                pending_arm_ = k;
                break;
            }
        }
        return pending_arm_;
    }
    case Mode::CollideTwice: {
        cur_assign_ = rsd_attribution(prefs_, blockowner(t), t, K);
        const long done = 2L * (m_ - 1) - collide_rounds_left_;
        int idx = static_cast<int>(done / 2);
        int target = idx >= rank_ ? idx + 1 : idx; // skip self
        pending_arm_ = cur_assign_.arm[static_cast<std::size_t>(target)];
        return pending_arm_;
    }
    case Mode::PunishWait: {
        const long bt = blocktime(t);
        cur_assign_ = rsd_attribution(prefs_, blockowner(t), t, K);
        if (signal_this_block_ && bt > 3L * K && bt <= 4L * K) {
            pending_arm_ = sendbit_arm(t, true);
        } else if (signal_this_block_ && bt > 4L * K && bt <= 5L * K) {
            pending_arm_ = cur_assign_.comm_arm;
        } else {
            pending_arm_ = scan_arm(t, rank_, K);
        }
        return pending_arm_;
    }
    case Mode::Main:
        break;
    }

    const long bt = blocktime(t);
    const int bo = blockowner(t);

    // Block-start bookkeeping: an exploring player whose top-M separation
    // test passes announces her preferences during her own block. The column
    // only becomes assignment-relevant at the block boundary, so sender and
    // listeners agree on the communication arm throughout.
    if (bt == 1 && sub_ == Sub::Exploring && bo == rank_) {
        std::vector<int> order;
        if (separation_ok(&order)) {
            lambda_ = order;
            sub_ = Sub::PrefSignaling;
            log_event(t, EventKind::PrefSignalStart);
        }
    }

    cur_assign_ = rsd_attribution(prefs_, bo, t, K);

    switch (sub_) {
    case Sub::Exploring:
        pending_arm_ = cur_assign_.arm[static_cast<std::size_t>(rank_)];
        break;
    case Sub::Exploiting: {
        const bool all_known = static_cast<int>(exploit_players().size()) == m_;
        inspecting_ = false;
        if (all_known && m_ > 1 && rng_.bernoulli(inspect_prob_)) {
            inspecting_ = true;
            int pick = rng_.uniform_int(m_ - 1);
            inspect_target_ = pick >= rank_ ? pick + 1 : pick;
            pending_arm_ = cur_assign_.arm[static_cast<std::size_t>(inspect_target_)];
            log_event(t, EventKind::Inspection, inspect_target_);
        } else {
            pending_arm_ =
                exploit_arm_override(t, cur_assign_.arm[static_cast<std::size_t>(rank_)]);
        }
        break;
    }
    case Sub::Listening: {
        const long mk = static_cast<long>(m_) * K;
        if (bt <= 2L * K) {
            pending_arm_ = scan_arm(t, rank_, K);
        } else if (bt <= 3L * K) {
            pending_arm_ =
                listen_entry_bt_ <= 2L * K ? sendbit_arm(t, true) : scan_arm(t, rank_, K);
        } else if (bt <= 4L * K) {
            pending_arm_ =
                listen_entry_bt_ <= 2L * K ? cur_assign_.comm_arm : scan_arm(t, rank_, K);
        } else if (bt <= 5L * K) {
            // Punish scan; a flagged listener signals on her own rank arm.
            pending_arm_ = punish_ ? rank_ : scan_arm(t, rank_, K);
        } else if (bt <= 5L * K + mk) {
            pending_arm_ = scan_arm(t, rank_, K);
        } else {
            const long n = bt - 5L * K - mk; // 1-based within repetition block
            const int repeater = static_cast<int>((n - 1) / mk);
            const int slot = static_cast<int>(((n - 1) % mk) / K);
            if (repeater == rank_) {
                const int a = lambda_[static_cast<std::size_t>(slot)];
                pending_arm_ = a >= 0 ? a : scan_arm(t, rank_, K);
            } else {
                pending_arm_ = scan_arm(t, rank_, K);
            }
        }
        break;
    }
    case Sub::PrefSignaling: {
        const long mk = static_cast<long>(m_) * K;
        if (bt <= K) {
            pending_arm_ = sendbit_arm(t, false);
        } else if (bt <= 2L * K) {
            pending_arm_ = cur_assign_.comm_arm;
        } else if (bt <= 4L * K) {
            pending_arm_ = scan_arm(t, rank_, K);
        } else if (bt <= 5L * K) {
            pending_arm_ = punish_ ? rank_ : scan_arm(t, rank_, K);
        } else if (bt <= 5L * K + mk) {
            const int slot = static_cast<int>((bt - 5L * K - 1) / K);
            pending_arm_ = lambda_[static_cast<std::size_t>(slot)];
        } else {
            const long n = bt - 5L * K - mk;
            const int repeater = static_cast<int>((n - 1) / mk);
            const int slot = static_cast<int>(((n - 1) % mk) / K);
            pending_arm_ = repeater == rank_ ? lambda_[static_cast<std::size_t>(slot)]
                                             : scan_arm(t, rank_, K);
        }
        break;
    }
    }
    return pending_arm_;
}

void RsdGtPlayer::observe(const Observation& obs) {
    const long t = obs.round;
    const int K = cfg_.num_arms;
    const bool eta = obs.collision.value_or(false);

    switch (mode_) {
    case Mode::Init:
        init_.observe(obs);
        if (init_.done()) {
            m_ = init_.m_hat();
            rank_ = init_.rank();
            block_len_ = 5L * K + static_cast<long>(m_) * K +
                         static_cast<long>(m_) * m_ * K;
            log_event(t, EventKind::EstimatedM, m_, init_.m_clamped() ? 1.0 : 0.0);
            log_event(t, EventKind::InitEnd);
            if (rank_ < 0) {
                log_event(t, EventKind::RankFallback);
                mode_ = Mode::Fallback;
                break;
            }
            log_event(t, EventKind::RankFixed, rank_);
            if (m_ >= cfg_.num_arms) {
                // The communication arm needs a free arm: M < K required.
                log_event(t, EventKind::ProtocolFailure, kReasonProtocol);
                mode_ = Mode::Fallback;
                break;
            }
            prefs_.assign(static_cast<std::size_t>(m_),
                          std::vector<int>(static_cast<std::size_t>(m_), -1));
            mode_ = Mode::Main;
            sub_ = Sub::Exploring;
        }
        break;

    case Mode::Fallback:
    case Mode::Sample:
        break;

    case Mode::Estimate: {
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
            std::vector<double> means(static_cast<std::size_t>(K));
            for (int k = 0; k < K; ++k) {
                means[static_cast<std::size_t>(k)] = est_[static_cast<std::size_t>(k)].mean();
            }
            punish_probs_ =
                punishment_probs(means, m_, rsd_punish_alpha(K, m_, cfg_.delta));
            log_event(t, EventKind::EstimationDone);
            log_event(t, EventKind::SamplingStart);
            mode_ = Mode::Sample;
        }
        break;
    }

    case Mode::CollideTwice:
        collide_rounds_left_ -= 1;
        if (collide_rounds_left_ == 0) begin_estimation(t);
        break;

    case Mode::PunishWait: {
        const long bt = blocktime(t);
        if (signal_this_block_ && bt == 5L * K) {
            begin_estimation(t);
        } else if (bt == block_len_) {
            signal_this_block_ = true; // signal in the next block
        }
        break;
    }

    case Mode::Main: {
        const long bt = blocktime(t);
        const int bo = blockowner(t);
        const long mk = static_cast<long>(m_) * K;

        switch (sub_) {
        case Sub::Exploring:
            pulls_[static_cast<std::size_t>(obs.arm)] += 1;
            value_sum_[static_cast<std::size_t>(obs.arm)] += obs.value.value_or(0.0);
            means_[static_cast<std::size_t>(obs.arm)] =
                value_sum_[static_cast<std::size_t>(obs.arm)] /
                static_cast<double>(pulls_[static_cast<std::size_t>(obs.arm)]);
            if (eta && obs.arm == cur_assign_.comm_arm) {
                if (bt > 4L * K) {
                    flag(t, kReasonLateCollision);
                    to_punish_path(t);
                } else {
                    enter_listen(t);
                }
            }
            break;

        case Sub::Exploiting: {
            if (inspecting_) {
                if (!eta) {
                    // The inspected arm was empty: its owner deviated.
                    flag(t, kReasonLiarCaught);
                    log_event(t, EventKind::InspectionCaught, inspect_target_);
                    to_punish_path(t);
                }
                break;
            }
            bool scheduled_elsewhere = false;
            for (int i = 0; i < m_ && !scheduled_elsewhere; ++i) {
                if (i != rank_ && cur_assign_.arm[static_cast<std::size_t>(i)] == obs.arm) {
                    scheduled_elsewhere = true;
                }
            }
            const bool unintended = eta && !scheduled_elsewhere;
            const bool all_known = static_cast<int>(exploit_players().size()) == m_;
            if (all_known) {
                consecutive_collisions_ = unintended ? consecutive_collisions_ + 1 : 0;
                if (consecutive_collisions_ >= 2) {
                    flag(t, kReasonTwoInARow);
                    to_punish_path(t);
                }
            } else if (unintended) {
                if (bt > 4L * K) {
                    flag(t, kReasonLateCollision);
                    to_punish_path(t);
                } else {
                    enter_listen(t);
                }
            }
            break;
        }

        case Sub::Listening:
            if (bt > 4L * K && bt <= 5L * K) {
                if (eta && !punish_) flag(t, kReasonPunishScanHit);
            } else if (bt > 5L * K && bt <= 5L * K + mk) {
                if (eta) {
                    const int slot = static_cast<int>((bt - 5L * K - 1) / K);
                    if (lambda_[static_cast<std::size_t>(slot)] >= 0) {
                        flag(t, kReasonTwoSignals);
                    } else {
                        lambda_[static_cast<std::size_t>(slot)] = obs.arm;
                    }
                }
            } else if (bt > 5L * K + mk) {
                const long n = bt - 5L * K - mk;
                const int repeater = static_cast<int>((n - 1) / mk);
                const int slot = static_cast<int>(((n - 1) % mk) / K);
                if (repeater != rank_ && eta &&
                    lambda_[static_cast<std::size_t>(slot)] != obs.arm) {
                    flag(t, kReasonRepeatMismatch);
                }
            }
            if (bt == block_len_) finish_block(t);
            break;

        case Sub::PrefSignaling:
            if (bt > 4L * K && bt <= 5L * K) {
                if (eta && !punish_) flag(t, kReasonPunishScanHit);
            } else if (bt > 5L * K + mk) {
                const long n = bt - 5L * K - mk;
                const int repeater = static_cast<int>((n - 1) / mk);
                const int slot = static_cast<int>(((n - 1) % mk) / K);
                if (repeater != rank_ && eta &&
                    lambda_[static_cast<std::size_t>(slot)] != obs.arm) {
                    flag(t, kReasonRepeatMismatch);
                }
            }
            if (bt == block_len_) finish_block(t);
            break;
        }
        (void)bo;
        break;
    }
    }
}

void RsdGtPlayer::finish_block(long t) {
    if (sub_ == Sub::Listening) {
        log_event(t, EventKind::ListenEnd);
        bool complete = true;
        std::set<int> distinct;
        for (int a : lambda_) {
            if (a < 0) complete = false;
            distinct.insert(a);
        }
        if (!complete || static_cast<int>(distinct.size()) != m_) {
            flag(t, kReasonIncomplete);
        }
        if (punish_) {
            to_punish_path(t);
            return;
        }
        prefs_[static_cast<std::size_t>(blockowner(t))] = lambda_;
        sub_ = prefs_[static_cast<std::size_t>(rank_)].front() >= 0 ? Sub::Exploiting
                                                                    : Sub::Exploring;
    } else if (sub_ == Sub::PrefSignaling) {
        log_event(t, EventKind::PrefSignalEnd);
        if (punish_) {
            to_punish_path(t);
            return;
        }
        prefs_[static_cast<std::size_t>(rank_)] = lambda_;
        sub_ = Sub::Exploiting;
        log_event(t, EventKind::ExploitStart);
    }
}

} // namespace mmab
