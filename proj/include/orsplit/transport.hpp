#pragma once

#include <array>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "orsplit/message.hpp"

namespace orsplit {

struct Envelope {
    uint32_t src = 0;
    uint32_t dst = 0;
    uint64_t seq = 0;  // per-(src,dst) sequence number
    uint64_t release = 0;  // virtual tick at which the envelope becomes visible
    std::vector<uint8_t> bytes;
};

struct TransportStats {
    std::array<uint64_t, kMsgKindCount> messages{};
    std::array<uint64_t, kMsgKindCount> bytes{};
    uint64_t total_messages() const {
        uint64_t n = 0;
        for (auto m : messages) n += m;
        return n;
    }
    uint64_t total_bytes() const {
        uint64_t n = 0;
        for (auto b : bytes) n += b;
        return n;
    }
};

/// In-process message bus with the ordering semantics of the original
/// platform: FIFO per (src,dst) pair, no guarantee across senders. Messages
/// always cross the bus as serialized frames. A seeded delay window makes
/// cross-sender reordering reproducible; delivery is exactly-once and
/// loss-free. Thread-safe for concurrent senders; each receiver queue has a
/// single consumer.
class Bus {
public:
    /// realtime=false: releases gate on the lockstep tick clock, with a
    /// seeded per-envelope delay inside `reorder_window` ticks.
    /// realtime=true (threaded mode): envelopes release immediately and the
    /// thread schedule provides the cross-sender nondeterminism.
    Bus(uint32_t agent_count, uint64_t seed, uint32_t reorder_window, bool realtime = false);

    uint32_t agent_count() const { return n_; }

    void send(uint32_t src, uint32_t dst, const Message& msg);
    void broadcast(uint32_t src, const Message& msg);

    /// Non-blocking: drains every released envelope into dst's inbox, then
    /// extracts messages (optionally only of kind `filter`, preserving the
    /// arrival order of what remains).
    std::vector<Message> poll(uint32_t dst, std::optional<MsgKind> filter = std::nullopt);

    /// Pops the single oldest message from dst's inbox, leaving the rest.
    std::optional<Message> poll_one(uint32_t dst);
    bool inbox_empty(uint32_t dst);

    /// Lockstep mode: advances the virtual clock that gates releases.
    void advance(uint64_t ticks = 1);
    uint64_t now() const;

    /// Threaded mode: blocks until something is (or may be) deliverable.
    void wait_for_mail(uint32_t dst, uint32_t max_micros);

    TransportStats stats() const;
    const std::vector<Envelope>& trace() const { return trace_; }
    void record_trace(bool on) { trace_on_ = on; }

private:
    struct Pair {
        std::deque<Envelope> q;
        uint64_t next_seq = 0;
        uint64_t last_release = 0;
    };

    uint32_t n_;
    uint32_t window_;
    bool realtime_;
    mutable std::mutex mtx_;
    std::condition_variable cv_;
    std::mt19937_64 rng_;
    uint64_t clock_ = 0;
    std::vector<Pair> pairs_;  // src * n + dst
    std::vector<std::deque<Message>> inbox_;
    TransportStats stats_;
    std::vector<Envelope> trace_;
    bool trace_on_ = false;

    void enqueue(uint32_t src, uint32_t dst, const Message& msg);
    void drain_released(uint32_t dst);
};

}  // namespace orsplit
