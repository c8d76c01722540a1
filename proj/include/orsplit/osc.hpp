#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "orsplit/message.hpp"

namespace orsplit {

/// Ordered list of agent ranks, leftmost first: each agent's approximation
/// of the left-to-right order of agents on the search-tree frontier. A
/// receiver of work always lands immediately to the right of the giver.
class LinearVector {
public:
    void init_first_running(uint32_t rank) { order_.assign(1, rank); }

    bool contains(uint32_t rank) const;
    bool leftmost_is(uint32_t rank) const { return !order_.empty() && order_.front() == rank; }

    /// Ranks strictly left of `rank`; empty when rank is absent or leftmost.
    std::vector<uint32_t> left_of(uint32_t rank) const;

    /// True when a is strictly left of b; absent ranks are treated as right.
    bool is_left_of(uint32_t a, uint32_t b) const;

    void remove(uint32_t rank);

    /// Sharing event giver -> receiver: the receiver moves immediately to the
    /// giver's right. An absent giver appends the receiver at the right end.
    void place_after(uint32_t giver, uint32_t receiver);

    const std::vector<uint32_t>& order() const { return order_; }

private:
    std::vector<uint32_t> order_;
};

/// Duplicate filter for the dual Send_LoadInfo broadcasts in OSC mode.
/// send1[i][j] counts notifications of a sharing i->j received from i,
/// send2[i][j] those received from j; the linear vector is updated only when
/// the newly arrived notification strictly leads its counterpart.
class DedupMatrix {
public:
    explicit DedupMatrix(uint32_t n = 0) : n_(n), send1_(size_t(n) * n, 0), send2_(size_t(n) * n, 0) {}

    /// Records one notification of sharing giver->receiver arriving from
    /// `from` (which is either the giver or the receiver) and reports
    /// whether the linear vector should be updated.
    bool record(uint32_t giver, uint32_t receiver, uint32_t from);

    uint64_t send1(uint32_t i, uint32_t j) const { return send1_[size_t(i) * n_ + j]; }
    uint64_t send2(uint32_t i, uint32_t j) const { return send2_[size_t(i) * n_ + j]; }

private:
    uint32_t n_;
    std::vector<uint64_t> send1_, send2_;
};

/// Ranks waiting on this agent before executing their order-sensitive
/// computation; drained with acknowledgments when the owner goes scheduling.
using WaitingQueue = std::deque<uint32_t>;

}  // namespace orsplit
