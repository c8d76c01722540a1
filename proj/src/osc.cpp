#include "orsplit/osc.hpp"

#include <algorithm>

namespace orsplit {

bool LinearVector::contains(uint32_t rank) const {
    return std::find(order_.begin(), order_.end(), rank) != order_.end();
}

std::vector<uint32_t> LinearVector::left_of(uint32_t rank) const {
    std::vector<uint32_t> out;
    for (uint32_t r : order_) {
        if (r == rank) return out;
        out.push_back(r);
    }
    return {};  // absent: nobody is reliably to the left
}

bool LinearVector::is_left_of(uint32_t a, uint32_t b) const {
    auto ia = std::find(order_.begin(), order_.end(), a);
    auto ib = std::find(order_.begin(), order_.end(), b);
    if (ia == order_.end()) return false;
    if (ib == order_.end()) return true;
    return ia < ib;
}

void LinearVector::remove(uint32_t rank) {
    order_.erase(std::remove(order_.begin(), order_.end(), rank), order_.end());
}

void LinearVector::place_after(uint32_t giver, uint32_t receiver) {
    if (giver == receiver) return;
    remove(receiver);
    auto it = std::find(order_.begin(), order_.end(), giver);
    if (it == order_.end()) {
        order_.push_back(receiver);  // giver unknown: right end
    } else {
        order_.insert(it + 1, receiver);
    }
}

bool DedupMatrix::record(uint32_t giver, uint32_t receiver, uint32_t from) {
    uint64_t& mine = from == giver ? send1_[size_t(giver) * n_ + receiver]
                                   : send2_[size_t(giver) * n_ + receiver];
    const uint64_t& other = from == giver ? send2_[size_t(giver) * n_ + receiver]
                                          : send1_[size_t(giver) * n_ + receiver];
    ++mine;
    return mine > other;
}

}  // namespace orsplit
