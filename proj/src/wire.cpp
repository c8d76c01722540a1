#include "orsplit/wire.hpp"

#include <algorithm>

namespace orsplit {

uint32_t TermGraph::add(Term t) {
    auto cmp = [](const std::pair<Term, uint32_t>& a, Term b) { return a.first < b; };
    auto it = std::lower_bound(memo_.begin(), memo_.end(), t, cmp);
    if (it != memo_.end() && it->first == t) return it->second;

    WireNode n;
    n.tag = t->tag;
    switch (t->tag) {
        case Tag::Atom: n.functor = t->functor; break;
        case Tag::Int: n.ival = t->ival; break;
        case Tag::Var: n.ival = t->ival; break;
        case Tag::Struct: {
            n.functor = t->functor;
            n.children.reserve(t->arity);
            for (uint32_t i = 0; i < t->arity; ++i) n.children.push_back(add(t->args[i]));
            break;
        }
    }
    uint32_t idx = static_cast<uint32_t>(nodes.size());
    nodes.push_back(std::move(n));
    // re-find: children insertion may have shifted the bound
    it = std::lower_bound(memo_.begin(), memo_.end(), t, cmp);
    memo_.insert(it, {t, idx});
    return idx;
}

void TermGraph::encode(ByteWriter& w) const {
    w.u32(static_cast<uint32_t>(nodes.size()));
    for (const WireNode& n : nodes) {
        w.u8(static_cast<uint8_t>(n.tag));
        switch (n.tag) {
            case Tag::Atom: w.u32(n.functor); break;
            case Tag::Int:
            case Tag::Var: w.i64(n.ival); break;
            case Tag::Struct:
                w.u32(n.functor);
                w.u32(static_cast<uint32_t>(n.children.size()));
                for (uint32_t c : n.children) w.u32(c);
                break;
        }
    }
}

TermGraph TermGraph::decode(ByteReader& r) {
    TermGraph g;
    uint32_t count = r.u32();
    g.nodes.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        WireNode n;
        n.tag = static_cast<Tag>(r.u8());
        switch (n.tag) {
            case Tag::Atom: n.functor = r.u32(); break;
            case Tag::Int:
            case Tag::Var: n.ival = r.i64(); break;
            case Tag::Struct: {
                n.functor = r.u32();
                uint32_t arity = r.u32();
                n.children.resize(arity);
                for (uint32_t& c : n.children) {
                    c = r.u32();
                    if (c >= i) throw WireError("forward reference in term graph");
                }
                break;
            }
            default: throw WireError("bad term tag");
        }
        g.nodes.push_back(std::move(n));
    }
    return g;
}

Term TermGraph::build(uint32_t idx, TermArena& arena) const {
    if (built_.size() != nodes.size()) built_.assign(nodes.size(), nullptr);
    if (idx >= nodes.size()) throw WireError("node index out of range");
    if (built_[idx]) return built_[idx];
    const WireNode& n = nodes[idx];
    Term t = nullptr;
    switch (n.tag) {
        case Tag::Atom: t = arena.atom(n.functor); break;
        case Tag::Int: t = arena.integer(n.ival); break;
        case Tag::Var: t = arena.variable(static_cast<uint64_t>(n.ival)); break;
        case Tag::Struct: {
            std::vector<Term> args(n.children.size());
            for (size_t i = 0; i < n.children.size(); ++i) args[i] = build(n.children[i], arena);
            t = arena.make(n.functor, args);
            break;
        }
    }
    built_[idx] = t;
    return t;
}

}  // namespace orsplit
