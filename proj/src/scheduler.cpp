#include "orsplit/scheduler.hpp"

namespace orsplit {

VictimChoice select_victim(const LoadVector& loads, VictimPolicy policy, uint32_t threshold,
                           std::optional<uint32_t> previous_victim) {
    uint32_t n = static_cast<uint32_t>(loads.v.size());
    if (policy == VictimPolicy::Centralized) {
        if (loads.self == 0) return AllIdle{};  // the central agent never requests
        return Victim{0};
    }
    if (loads.all_others_zero()) return AllIdle{};
    if (policy == VictimPolicy::RandomRr) {
        uint32_t start = previous_victim ? (*previous_victim + 1) % n : 0;
        for (uint32_t k = 0; k < n; ++k) {
            uint32_t r = (start + k) % n;
            if (r == loads.self) continue;
            if (loads.v[r] > threshold) return Victim{r};
        }
        return Defer{};
    }
    // bottom_most / top_most: greatest load, ties to the lowest rank
    uint32_t best = n, best_load = 0;
    for (uint32_t r = 0; r < n; ++r) {
        if (r == loads.self) continue;
        if (loads.v[r] > best_load) {
            best = r;
            best_load = loads.v[r];
        }
    }
    if (best == n) return AllIdle{};
    if (best_load <= threshold) return Defer{};
    return Victim{best};
}

Message TokenState::initiate() {
    round_active_ = true;
    black_ = false;  // the initiator whitens when it starts a round
    Message tok;
    tok.kind = MsgKind::TerminationToken;
    tok.src = rank_;
    tok.token_color = 0;
    tok.token_initiator = rank_;
    tok.token_deficit = 0;
    return tok;
}

TokenState::TokenAction TokenState::on_token_idle(const Message& token) {
    TokenAction act;
    if (token.token_initiator == rank_) {
        round_active_ = false;
        bool white = token.token_color == 0 && !black_;
        int64_t balance = token.token_deficit + (work_sent_ - work_recv_);
        if (white && balance == 0) {
            act.confirmed = true;
        } else {
            act.returned = true;
        }
        return act;
    }
    Message fwd = token;
    fwd.src = rank_;
    if (black_) fwd.token_color = 1;
    fwd.token_deficit += work_sent_ - work_recv_;
    black_ = false;  // whitened by passing the token on
    act.forward = fwd;
    return act;
}

}  // namespace orsplit
