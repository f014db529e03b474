#include "mmab/commproto.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>

namespace mmab {

double BitMessage::value() const {
    double v = 0.0;
    double w = 1.0;
    for (std::uint8_t b : bits) {
        if (b) v += w;
        w *= 0.5;
    }
    return v;
}

BitMessage BitMessage::encode(double value, int p) {
    if (p < 0) throw std::invalid_argument("BitMessage: p must be >= 0");
    const double scale = std::ldexp(1.0, p);
    const double scaled = value * scale;
    const double rounded = std::round(scaled);
    if (!(value >= 0.0 && value <= 1.0) || std::abs(scaled - rounded) > 1e-9) {
        throw std::invalid_argument("BitMessage: value not on the 2^-p grid");
    }
    auto units = static_cast<long>(rounded); // value = units * 2^-p
    BitMessage msg = zeros(p);
    // Greedy dyadic expansion, most significant weight first.
    long weight = 1L << p; // 2^0 in units of 2^-p
    for (int n = 0; n <= p; ++n) {
        if (units >= weight) {
            msg.bits[static_cast<std::size_t>(n)] = 1;
            units -= weight;
        }
        weight >>= 1;
    }
    if (units != 0) throw std::invalid_argument("BitMessage: value not representable");
    return msg;
}

std::vector<int> send_value_schedule(int sender_arm, int receiver_arm, int p, double value) {
    if (sender_arm == receiver_arm) {
        throw std::invalid_argument("send_value_schedule: sender and receiver must differ");
    }
    const BitMessage msg = BitMessage::encode(value, p);
    std::vector<int> arms(msg.bits.size());
    for (std::size_t n = 0; n < msg.bits.size(); ++n) {
        arms[n] = msg.bits[n] ? receiver_arm : sender_arm;
    }
    return arms;
}

double receive_value(const std::vector<std::uint8_t>& collision_bits, int p) {
    if (static_cast<int>(collision_bits.size()) != p + 1) {
        throw std::invalid_argument("receive_value: expected p+1 bits");
    }
    return BitMessage{collision_bits}.value();
}

CommOutcome back_and_forth(int p, double value, const std::vector<int>& flips_leg1,
                           const std::vector<int>& flips_leg2) {
    BitMessage sent = BitMessage::encode(value, p);
    BitMessage leg1 = sent;
    for (int n : flips_leg1) leg1.bits.at(static_cast<std::size_t>(n)) = 1;
    // The receiver echoes exactly what she decoded; the echo can again only
    // gain ones.
    BitMessage leg2 = leg1;
    for (int n : flips_leg2) leg2.bits.at(static_cast<std::size_t>(n)) = 1;
    CommOutcome out;
    out.received = leg1.value();
    out.corrupted = leg2.bits != sent.bits;
    return out;
}

SignalSetOutcome signal_set(int num_arms, int num_players, const std::set<int>& leader1_set,
                            const std::set<int>& leader2_set,
                            const std::vector<std::pair<int, int>>& jams) {
    const int K = num_arms;
    const int M = num_players;
    if (M < 3) throw std::invalid_argument("signal_set: needs at least one non-leader");
    for (const auto& s : {leader1_set, leader2_set}) {
        for (int a : s) {
            if (a < 0 || a >= K) throw std::invalid_argument("signal_set: arm out of range");
        }
    }
    const std::set<int> leader_sets[2] = {leader1_set, leader2_set};

    struct Scanner {
        int length = 0;       // 0 until a cardinality collision is seen
        std::set<int> decoded;
        bool punish = false;
    };
    std::vector<Scanner> scanners(static_cast<std::size_t>(M - 2));

    const int max_len =
        static_cast<int>(std::max(leader1_set.size(), leader2_set.size()));
    const int total_rounds = K + max_len * K;

    std::vector<int> arms(static_cast<std::size_t>(M), 0);
    for (int t = 0; t < total_rounds; ++t) {
        const bool cardinality_round = t < K;
        const int block = cardinality_round ? -1 : (t - K) / K; // element index

        for (int l = 0; l < 2; ++l) {
            const auto& s = leader_sets[l];
            int arm;
            if (cardinality_round) {
                // Cardinality c maps to arm index c-1; an empty set is
                // signalled by joining the collision-free scan.
                arm = s.empty() ? scan_arm(t, l, K) : static_cast<int>(s.size()) - 1;
            } else if (block < static_cast<int>(s.size())) {
                arm = *std::next(s.begin(), block);
            } else {
                arm = scan_arm(t, l, K);
            }
            arms[static_cast<std::size_t>(l)] = arm;
        }
        for (int j = 2; j < M; ++j) {
            arms[static_cast<std::size_t>(j)] = scan_arm(t, j, K);
        }

        std::vector<int> count(static_cast<std::size_t>(K), 0);
        for (int a : arms) count[static_cast<std::size_t>(a)] += 1;
        for (const auto& [jt, ja] : jams) {
            if (jt == t) count[static_cast<std::size_t>(ja)] += 1;
        }

        for (int j = 2; j < M; ++j) {
            Scanner& sc = scanners[static_cast<std::size_t>(j - 2)];
            const int a = arms[static_cast<std::size_t>(j)];
            const bool eta = count[static_cast<std::size_t>(a)] > 1;
            if (!eta) continue;
            if (cardinality_round) {
                if (sc.length != 0) {
                    sc.punish = true; // two differing cardinality signals
                } else {
                    sc.length = a + 1;
                }
            } else if (block < sc.length) {
                sc.decoded.insert(a);
            }
        }
    }
    SignalSetOutcome out;
    out.rounds = total_rounds;
    for (const Scanner& sc : scanners) {
        bool punish = sc.punish;
        if (static_cast<int>(sc.decoded.size()) != sc.length) punish = true;
        out.punish.push_back(punish);
        out.received.push_back(sc.decoded);
    }
    return out;
}

} // namespace mmab
