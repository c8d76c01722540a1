#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "orsplit/label.hpp"
#include "orsplit/term.hpp"

namespace orsplit {

constexpr uint8_t kWireVersion = 1;

struct WireError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Little-endian, fixed-width primitive writer. All frames start with a
/// version byte; bit-exactness is promised only between peers of one build.
class ByteWriter {
public:
    std::vector<uint8_t> buf;

    void u8(uint8_t v) { buf.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(uint8_t(v >> (8 * i)));
    }
    void i64(int64_t v) { u64(static_cast<uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        buf.insert(buf.end(), s.begin(), s.end());
    }
    void bytes(std::span<const uint8_t> b) {
        u32(static_cast<uint32_t>(b.size()));
        buf.insert(buf.end(), b.begin(), b.end());
    }
};

class ByteReader {
public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8() { return take(1)[0]; }
    uint32_t u32() {
        auto b = take(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        auto b = take(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }
    int64_t i64() { return static_cast<int64_t>(u64()); }
    std::string str() {
        uint32_t n = u32();
        auto b = take(n);
        return std::string(b.begin(), b.end());
    }
    std::vector<uint8_t> bytes() {
        uint32_t n = u32();
        auto b = take(n);
        return std::vector<uint8_t>(b.begin(), b.end());
    }
    bool done() const { return pos_ == data_.size(); }

private:
    std::span<const uint8_t> data_;
    size_t pos_ = 0;
    std::span<const uint8_t> take(size_t n) {
        if (pos_ + n > data_.size()) throw WireError("truncated frame");
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
};

/// Flattened term graph: nodes in children-first order, sharing preserved.
/// Var leaves carry agent-local variable ids, which are aligned between the
/// two parties of a sharing operation by construction.
struct WireNode {
    Tag tag = Tag::Atom;
    Symbol functor = 0;
    int64_t ival = 0;
    std::vector<uint32_t> children;
};

class TermGraph {
public:
    std::vector<WireNode> nodes;

    /// Serializes a term, memoizing shared subterms by node address.
    uint32_t add(Term t);

    void encode(ByteWriter& w) const;
    static TermGraph decode(ByteReader& r);

    /// Materializes node `idx` into `arena`, reusing already-built nodes.
    Term build(uint32_t idx, TermArena& arena) const;
    void reset_build_cache() const { built_.assign(nodes.size(), nullptr); }

private:
    std::vector<std::pair<Term, uint32_t>> memo_;  // sorted by pointer
    mutable std::vector<Term> built_;
};

}  // namespace orsplit
