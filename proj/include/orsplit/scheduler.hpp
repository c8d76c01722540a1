#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "orsplit/message.hpp"

namespace orsplit {

enum class VictimPolicy : uint8_t { BottomMost, TopMost, RandomRr, Centralized };

/// Per-agent estimated loads, indexed by rank. Load is approximated by the
/// number of parallel choice-points with unexplored alternatives.
struct LoadVector {
    std::vector<uint32_t> v;
    uint32_t self = 0;

    LoadVector() = default;
    LoadVector(uint32_t n, uint32_t self_rank) : v(n, 0), self(self_rank) {}

    void set(uint32_t rank, uint32_t load) { v.at(rank) = load; }
    uint32_t get(uint32_t rank) const { return v.at(rank); }
    bool all_others_zero() const {
        for (uint32_t i = 0; i < v.size(); ++i)
            if (i != self && v[i] != 0) return false;
        return true;
    }
    bool any_other_positive() const { return !all_others_zero(); }
};

struct Victim {
    uint32_t rank;
};
struct Defer {};   // someone has work, but nobody is above the threshold
struct AllIdle {};  // every other entry is zero: try termination detection
using VictimChoice = std::variant<Victim, Defer, AllIdle>;

/// Victim selection for an idle agent. bottom_most/top_most pick the rank
/// with the greatest load (ties to the lowest rank) and defer while the
/// maximum sits at or below the threshold; random_rr walks ranks round-robin
/// from the previous victim accepting the first with load above threshold;
/// centralized always asks the central agent (rank 0).
VictimChoice select_victim(const LoadVector& loads, VictimPolicy policy, uint32_t threshold,
                           std::optional<uint32_t> previous_victim);

/// Termination detection: a black-white token ring in the style of
/// Dijkstra-Feijen-van Gasteren, extended with an in-flight work-message
/// balance so that a Reply_With_Work overtaken by the token can never be
/// missed. Work messages (Reply_With_Work) are counted at send and receive;
/// the token accumulates (sent - received) over a full round and the
/// initiating agent confirms only on a white token with zero balance.
class TokenState {
public:
    void attach(uint32_t rank, uint32_t agent_count) {
        rank_ = rank;
        n_ = agent_count;
    }

    void on_work_sent() {
        ++work_sent_;
        black_ = true;
    }
    void on_work_received() {
        ++work_recv_;
        black_ = true;
    }

    bool round_active() const { return round_active_; }

    /// Starts a round from this (idle, all-zero-vector) agent.
    Message initiate();

    struct TokenAction {
        std::optional<Message> forward;  // pass the (re-colored) token on
        bool confirmed = false;          // this agent may broadcast Halt
        bool returned = false;           // own token came back, not confirmed
    };

    /// Handles an incoming token while idle. Busy agents hold tokens instead
    /// (see Agent); forwarding whitens this agent per the classic scheme.
    TokenAction on_token_idle(const Message& token);

private:
    uint32_t rank_ = 0;
    uint32_t n_ = 1;
    bool black_ = false;  // set when work was sent or received since last passage
    int64_t work_sent_ = 0;
    int64_t work_recv_ = 0;
    bool round_active_ = false;
};

}  // namespace orsplit
