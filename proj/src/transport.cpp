#include "orsplit/transport.hpp"

#include <cassert>
#include <chrono>

namespace orsplit {

std::vector<uint8_t> Message::encode() const {
    ByteWriter w;
    w.u8(kWireVersion);
    w.u8(static_cast<uint8_t>(kind));
    w.u32(src);
    w.u32(src_load);
    switch (kind) {
        case MsgKind::RequestWork:
            w.u32(static_cast<uint32_t>(labels.size()));
            for (const Label& l : labels) {
                w.u32(l.rank);
                w.u64(l.counter);
                w.u32(l.cp_index);
            }
            break;
        case MsgKind::ReplyWithWork: {
            assert(payload);
            w.bytes(payload->encode());
            break;
        }
        case MsgKind::SendLoadInfo:
            w.u32(giver);
            w.u32(receiver);
            w.u32(giver_load);
            w.u32(receiver_load);
            break;
        case MsgKind::TerminationToken:
            w.u8(token_color);
            w.u32(token_initiator);
            w.i64(token_deficit);
            break;
        default: break;  // kind + src + load suffice
    }
    return std::move(w.buf);
}

Message Message::decode(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.u8() != kWireVersion) throw WireError("message version mismatch");
    Message m;
    m.kind = static_cast<MsgKind>(r.u8());
    m.src = r.u32();
    m.src_load = r.u32();
    switch (m.kind) {
        case MsgKind::RequestWork: {
            m.labels.resize(r.u32());
            for (Label& l : m.labels) {
                l.rank = r.u32();
                l.counter = r.u64();
                l.cp_index = r.u32();
            }
            break;
        }
        case MsgKind::ReplyWithWork: {
            std::vector<uint8_t> blob = r.bytes();
            m.payload = std::make_shared<SharePayload>(SharePayload::decode(blob));
            break;
        }
        case MsgKind::SendLoadInfo:
            m.giver = r.u32();
            m.receiver = r.u32();
            m.giver_load = r.u32();
            m.receiver_load = r.u32();
            break;
        case MsgKind::TerminationToken:
            m.token_color = r.u8();
            m.token_initiator = r.u32();
            m.token_deficit = r.i64();
            break;
        default: break;
    }
    return m;
}

Bus::Bus(uint32_t agent_count, uint64_t seed, uint32_t reorder_window, bool realtime)
    : n_(agent_count), window_(reorder_window), realtime_(realtime), rng_(seed ^ 0x6f727370ull) {
    pairs_.resize(size_t(n_) * n_);
    inbox_.resize(n_);
}

void Bus::enqueue(uint32_t src, uint32_t dst, const Message& msg) {
    if (src >= n_ || dst >= n_) throw ProtocolError("send to unknown rank");
    Envelope env;
    env.src = src;
    env.dst = dst;
    env.bytes = msg.encode();

    std::lock_guard<std::mutex> lock(mtx_);
    Pair& p = pairs_[size_t(src) * n_ + dst];
    env.seq = p.next_seq++;
    if (realtime_) {
        env.release = 0;
    } else {
        uint64_t delay = window_ ? (rng_() % (window_ + 1)) : 0;
        // release ticks are clamped monotone per pair: FIFO within (src,dst)
        env.release = std::max(clock_ + 1 + delay, p.last_release);
        p.last_release = env.release;
    }
    auto k = static_cast<size_t>(msg.kind);
    stats_.messages[k] += 1;
    stats_.bytes[k] += env.bytes.size();
    if (trace_on_) trace_.push_back(env);
    p.q.push_back(std::move(env));
    cv_.notify_all();
}

void Bus::send(uint32_t src, uint32_t dst, const Message& msg) { enqueue(src, dst, msg); }

void Bus::broadcast(uint32_t src, const Message& msg) {
    for (uint32_t dst = 0; dst < n_; ++dst)
        if (dst != src) enqueue(src, dst, msg);
}

void Bus::drain_released(uint32_t dst) {
    // caller holds mtx_
    for (uint32_t src = 0; src < n_; ++src) {
        Pair& p = pairs_[size_t(src) * n_ + dst];
        while (!p.q.empty() && p.q.front().release <= clock_) {
            inbox_[dst].push_back(Message::decode(p.q.front().bytes));
            p.q.pop_front();
        }
    }
}

std::vector<Message> Bus::poll(uint32_t dst, std::optional<MsgKind> filter) {
    std::lock_guard<std::mutex> lock(mtx_);
    drain_released(dst);
    std::vector<Message> out;
    std::deque<Message>& box = inbox_[dst];
    if (!filter) {
        out.assign(std::make_move_iterator(box.begin()), std::make_move_iterator(box.end()));
        box.clear();
        return out;
    }
    for (auto it = box.begin(); it != box.end();) {
        if (it->kind == *filter) {
            out.push_back(std::move(*it));
            it = box.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

std::optional<Message> Bus::poll_one(uint32_t dst) {
    std::lock_guard<std::mutex> lock(mtx_);
    drain_released(dst);
    std::deque<Message>& box = inbox_[dst];
    if (box.empty()) return std::nullopt;
    Message m = std::move(box.front());
    box.pop_front();
    return m;
}

bool Bus::inbox_empty(uint32_t dst) {
    std::lock_guard<std::mutex> lock(mtx_);
    drain_released(dst);
    return inbox_[dst].empty();
}

void Bus::advance(uint64_t ticks) {
    std::lock_guard<std::mutex> lock(mtx_);
    clock_ += ticks;
    cv_.notify_all();
}

uint64_t Bus::now() const {
    std::lock_guard<std::mutex> lock(mtx_);
    return clock_;
}

void Bus::wait_for_mail(uint32_t dst, uint32_t max_micros) {
    std::unique_lock<std::mutex> lock(mtx_);
    drain_released(dst);
    if (!inbox_[dst].empty()) return;
    cv_.wait_for(lock, std::chrono::microseconds(max_micros));
}

TransportStats Bus::stats() const {
    std::lock_guard<std::mutex> lock(mtx_);
    return stats_;
}

}  // namespace orsplit
