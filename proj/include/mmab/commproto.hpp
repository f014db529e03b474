#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

namespace mmab {

// A (p+1)-bit collision-channel message; bits[n] carries weight 2^-n, so the
// encodable values are the dyadic grid {0, 2^-p, ..., 1} plus corrupted
// decodings above 1.
struct BitMessage {
    std::vector<std::uint8_t> bits;
    double value() const;

    static BitMessage encode(double value, int p); // throws off-grid
    static BitMessage zeros(int p) { return BitMessage{std::vector<std::uint8_t>(static_cast<std::size_t>(p) + 1, 0)}; }
};

struct CommOutcome {
    double received = 0.0;
    bool corrupted = false;
};

// Arm pulled by the sender on round n of a send: the receiver's arm for a
// 1-bit (forcing a collision), her own arm otherwise.
std::vector<int> send_value_schedule(int sender_arm, int receiver_arm, int p, double value);

// Decoder: sum of 2^-n over rounds with an observed collision.
double receive_value(const std::vector<std::uint8_t>& collision_bits, int p);

// Models a full back-and-forth exchange under an interfering player who can
// only create collisions (flip 0 -> 1). flips_leg1 / flips_leg2 list the bit
// positions jammed on each leg. The sender flags corruption iff the echoed
// message differs from what she sent.
CommOutcome back_and_forth(int p, double value, const std::vector<int>& flips_leg1 = {},
                           const std::vector<int>& flips_leg2 = {});

// Round-level model of the set broadcast: two leaders announce a set
// cardinality by sitting on the arm with that index for K rounds, then sit on
// each element for K rounds, while everyone else scans k = (t + j + 1) mod K.
// An optional jam schedule lists (round_offset, arm) collisions added by an
// interfering player. Returns each non-leader's decoded set and punish flag.
struct SignalSetOutcome {
    std::vector<std::set<int>> received;  // per non-leader
    std::vector<bool> punish;             // per non-leader
    int rounds = 0;
};

SignalSetOutcome signal_set(int num_arms, int num_players, const std::set<int>& leader1_set,
                            const std::set<int>& leader2_set,
                            const std::vector<std::pair<int, int>>& jams = {});

// Scan pattern shared by every waiting/receiving role: rank j visits each of
// the K arms once per K rounds.
inline int scan_arm(long t, int rank, int num_arms) {
    return static_cast<int>((t + rank + 1) % num_arms);
}

} // namespace mmab
