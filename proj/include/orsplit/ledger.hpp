#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "orsplit/label.hpp"

namespace orsplit {

/// Global record of choice-point alternatives: which clauses every
/// choice-point was created with and who executed each of them. Used by
/// tests and the acceptance suite to assert that each (choice-point,
/// alternative) pair runs on exactly one agent, with none lost.
class ExecutionLedger {
public:
    void reset(bool enabled) {
        std::lock_guard<std::mutex> lock(mtx_);
        enabled_ = enabled;
        entries_.clear();
    }
    bool enabled() const { return enabled_; }

    void created(CreationId id, const std::vector<uint32_t>& alternatives) {
        if (!enabled_) return;
        std::lock_guard<std::mutex> lock(mtx_);
        auto& e = entries_[key(id)];
        for (uint32_t a : alternatives) e[a];  // ensure slot, zero executions
    }

    void executed(CreationId id, uint32_t alternative, uint32_t /*rank*/) {
        if (!enabled_) return;
        std::lock_guard<std::mutex> lock(mtx_);
        entries_[key(id)][alternative]++;
    }

    struct Violation {
        CreationId id;
        uint32_t alternative;
        uint64_t executions;  // != 1
    };

    /// allow_omissions: first-solution runs legitimately leave work undone.
    std::vector<Violation> verify(bool allow_omissions = false) const {
        std::lock_guard<std::mutex> lock(mtx_);
        std::vector<Violation> out;
        for (const auto& [k, alts] : entries_) {
            for (const auto& [alt, n] : alts) {
                if (n == 1) continue;
                if (n == 0 && allow_omissions) continue;
                out.push_back({unkey(k), alt, n});
            }
        }
        return out;
    }

    size_t pair_count() const {
        std::lock_guard<std::mutex> lock(mtx_);
        size_t n = 0;
        for (const auto& [k, alts] : entries_) n += alts.size();
        return n;
    }

private:
    static uint64_t key(CreationId id) { return (uint64_t(id.rank) << 48) | id.serial; }
    static CreationId unkey(uint64_t k) { return {uint32_t(k >> 48), k & ((uint64_t(1) << 48) - 1)}; }

    mutable std::mutex mtx_;
    bool enabled_ = false;
    std::map<uint64_t, std::map<uint32_t, uint64_t>> entries_;
};

}  // namespace orsplit
