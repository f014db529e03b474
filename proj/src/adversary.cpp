#include "mmab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mmab {

namespace {

int argmax_mean(const EnvModel& env, int player) {
    int best = 0;
    for (int k = 1; k < env.num_arms; ++k) {
        if (env.mean(player, k) > env.mean(player, best)) best = k;
    }
    return best;
}

std::vector<int> top_m_by_index(const std::vector<double>& means, int m) {
    std::vector<int> order(means.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return means[static_cast<std::size_t>(a)] > means[static_cast<std::size_t>(b)];
    });
    order.resize(static_cast<std::size_t>(m));
    std::sort(order.begin(), order.end());
    return order;
}

} // namespace

BestArmCommitter::BestArmCommitter(const EnvModel& env, int player_index)
    : best_arm_(argmax_mean(env, player_index)) {}

GreedyBestResponse::GreedyBestResponse(const SelfishRobustMmabConfig& cfg, Rng rng,
                                       const EnvModel& env, int player_index)
    : SelfishRobustMmab(cfg, rng),
      true_top_(top_m_by_index(
          [&] {
              std::vector<double> mu(static_cast<std::size_t>(env.num_arms));
              for (int k = 0; k < env.num_arms; ++k) mu[static_cast<std::size_t>(k)] = env.mean(player_index, k);
              return mu;
          }(),
          env.num_players)) {}

int GreedyBestResponse::act(long t) {
    const int honest = SelfishRobustMmab::act(t);
    if (rank() < 0 || estimated_m() <= 0) return honest;
    const char* phase = SelfishRobustMmab::phase_name();
    if (std::string_view(phase) != "explo") return honest;
    const int m = static_cast<int>(true_top_.size());
    return true_top_[static_cast<std::size_t>((t + rank() + 1) % m)];
}

Jammer::Jammer(const AdversarySpec& spec, const EnvModel& env)
    : arm_(spec.jam_arm), victim_(spec.jam_victim) {
    if (!arm_ && !victim_) arm_ = argmax_mean(env, 0);
}

int Jammer::act(long t) {
    (void)t;
    if (arm_) return *arm_;
    return last_victim_arm_;
}

void Jammer::see_round(const RoundTrace& trace) {
    if (victim_) {
        last_victim_arm_ = trace.actions[static_cast<std::size_t>(*victim_)];
    }
}

StatLiar::StatLiar(const Config& cfg, Rng rng, const AdversarySpec& spec)
    : SicGtPlayer(cfg, rng), target_arm_(spec.target_arm) {
    fake_[0] = spec.fake_value;
    fake_[1] = spec.fake_value_leader2.value_or(spec.fake_value);
}

double StatLiar::value_to_send(int arm, int leader) const {
    if (arm == target_arm_) {
        // Snap the lie onto the current quantization grid so it encodes.
        const double scale = std::ldexp(1.0, comm_phase());
        return std::floor(fake_[leader] * scale + 0.5) / scale;
    }
    return SicGtPlayer::value_to_send(arm, leader);
}

MessageCorruptor::MessageCorruptor(const Config& cfg, Rng rng, const AdversarySpec& spec)
    : SicGtPlayer(cfg, rng), spec_(spec) {}

int MessageCorruptor::jam_override(const CommSlot& slot) const {
    if (slot.phase == spec_.corrupt_phase && slot.sender == spec_.corrupt_sender &&
        slot.receiver == spec_.corrupt_receiver && slot.arm == spec_.corrupt_arm &&
        slot.leg == spec_.corrupt_leg && slot.bit == spec_.corrupt_bit) {
        // Collide where the listening side of this leg sits.
        return slot.leg == 0 ? slot.receiver : slot.sender;
    }
    return -1;
}

RankRigger::RankRigger(const Config& cfg, Rng rng)
    : RsdGtPlayer(
          [&] {
              Config rigged = cfg;
              rigged.rig_chair_arm = 0;
              return rigged;
          }(),
          rng) {}

PreferenceLiar::PreferenceLiar(const Config& cfg, Rng rng, const AdversarySpec& spec,
                               const EnvModel& env, int player_index)
    : RsdGtPlayer(cfg, rng),
      fake_means_(spec.fake_means),
      deviate_(spec.deviate),
      true_best_(argmax_mean(env, player_index)) {
    if (static_cast<int>(fake_means_.size()) != env.num_arms) {
        throw std::invalid_argument("PreferenceLiar: fake means must have K entries");
    }
}

int PreferenceLiar::exploit_arm_override(long t, int assigned) {
    (void)t;
    return deviate_ ? true_best_ : assigned;
}

std::string AdversarySpec::name() const {
    switch (kind) {
    case AdversaryKind::BestArmCommitter: return "best-arm-committer";
    case AdversaryKind::GreedyBestResponse: return "greedy-best-response";
    case AdversaryKind::RankRigger: return "rank-rigger";
    case AdversaryKind::StatLiar: return "stat-liar";
    case AdversaryKind::MessageCorruptor: return "message-corruptor";
    case AdversaryKind::Jammer: return "jammer";
    case AdversaryKind::PreferenceLiar: return "preference-liar";
    }
    return "?";
}

AdversarySpec AdversarySpec::parse(const std::string& text) {
    AdversarySpec spec;
    std::string head = text;
    std::string args;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        head = text.substr(0, colon);
        args = text.substr(colon + 1);
    }
    if (head == "best-arm-committer") spec.kind = AdversaryKind::BestArmCommitter;
    else if (head == "greedy-best-response") spec.kind = AdversaryKind::GreedyBestResponse;
    else if (head == "rank-rigger") spec.kind = AdversaryKind::RankRigger;
    else if (head == "stat-liar") spec.kind = AdversaryKind::StatLiar;
    else if (head == "message-corruptor") spec.kind = AdversaryKind::MessageCorruptor;
    else if (head == "jammer") spec.kind = AdversaryKind::Jammer;
    else if (head == "preference-liar") spec.kind = AdversaryKind::PreferenceLiar;
    else throw std::invalid_argument("unknown adversary kind: " + head);

    std::stringstream ss(args);
    std::string kv;
    while (std::getline(ss, kv, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad adversary option: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "arm") spec.target_arm = std::stoi(val);
        else if (key == "v1") spec.fake_value = std::stod(val);
        else if (key == "v2") spec.fake_value_leader2 = std::stod(val);
        else if (key == "phase") spec.corrupt_phase = std::stoi(val);
        else if (key == "sender") spec.corrupt_sender = std::stoi(val);
        else if (key == "receiver") spec.corrupt_receiver = std::stoi(val);
        else if (key == "leg") spec.corrupt_leg = std::stoi(val);
        else if (key == "bit") spec.corrupt_bit = std::stoi(val);
        else if (key == "jam-arm") spec.jam_arm = std::stoi(val);
        else if (key == "victim") spec.jam_victim = std::stoi(val);
        else if (key == "deviate") spec.deviate = val == "1" || val == "true";
        else throw std::invalid_argument("unknown adversary option: " + key);
    }
    return spec;
}

std::unique_ptr<Player> make_adversary(const AdversarySpec& spec, const std::string& algo,
                                       const EnvModel& env, int player_index, double beta,
                                       Rng rng) {
    switch (spec.kind) {
    case AdversaryKind::BestArmCommitter:
        return std::make_unique<BestArmCommitter>(env, player_index);
    case AdversaryKind::Jammer:
        return std::make_unique<Jammer>(spec, env);
    case AdversaryKind::GreedyBestResponse: {
        SelfishRobustMmabConfig cfg{env.num_arms, env.horizon, beta};
        return std::make_unique<GreedyBestResponse>(cfg, rng, env, player_index);
    }
    case AdversaryKind::StatLiar: {
        SicGtPlayer::Config cfg{env.num_arms, env.horizon};
        return std::make_unique<StatLiar>(cfg, rng, spec);
    }
    case AdversaryKind::MessageCorruptor: {
        SicGtPlayer::Config cfg{env.num_arms, env.horizon};
        return std::make_unique<MessageCorruptor>(cfg, rng, spec);
    }
    case AdversaryKind::RankRigger: {
        RsdGtPlayer::Config cfg{env.num_arms, env.horizon, env.delta};
        return std::make_unique<RankRigger>(cfg, rng);
    }
    case AdversaryKind::PreferenceLiar: {
        RsdGtPlayer::Config cfg{env.num_arms, env.horizon, env.delta};
        AdversarySpec filled = spec;
        if (filled.fake_means.empty()) {
            // Default lie: invert the true preference order.
            filled.fake_means.resize(static_cast<std::size_t>(env.num_arms));
            for (int k = 0; k < env.num_arms; ++k) {
                filled.fake_means[static_cast<std::size_t>(k)] =
                    1.0 - env.mean(player_index, k);
            }
        }
        return std::make_unique<PreferenceLiar>(cfg, rng, filled, env, player_index);
    }
    }
    throw std::invalid_argument("unhandled adversary kind");
    (void)algo;
}

} // namespace mmab
