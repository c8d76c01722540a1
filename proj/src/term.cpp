#include "orsplit/term.hpp"

#include <cassert>
#include <memory>

namespace orsplit {

SymbolTable& SymbolTable::instance() {
    static SymbolTable table;
    return table;
}

Symbol SymbolTable::intern(std::string_view name) {
    std::lock_guard<std::mutex> lock(mtx_);
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    Symbol id = static_cast<Symbol>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
}

const std::string& SymbolTable::name(Symbol s) const {
    std::lock_guard<std::mutex> lock(mtx_);
    return names_.at(s);
}

Symbol intern(std::string_view name) { return SymbolTable::instance().intern(name); }
const std::string& symbol_name(Symbol s) { return SymbolTable::instance().name(s); }

void* TermArena::alloc_raw(size_t bytes) {
    bytes = (bytes + 15) & ~size_t{15};
    assert(bytes <= kChunk);
    size_t in_chunk = used_ % kChunk;
    if (chunks_.empty() || in_chunk + bytes > kChunk) {
        // skip the unusable tail of the current chunk
        if (!chunks_.empty() && in_chunk != 0) used_ += kChunk - in_chunk;
        size_t chunk_idx = used_ / kChunk;
        while (chunks_.size() <= chunk_idx) chunks_.emplace_back(std::make_unique<char[]>(kChunk));
        in_chunk = 0;
    }
    char* p = chunks_[used_ / kChunk].get() + in_chunk;
    used_ += bytes;
    return p;
}

void TermArena::rewind(size_t m) {
    assert(m <= used_);
    used_ = m;
}

Term TermArena::atom(Symbol s) {
    auto* n = static_cast<TermNode*>(alloc_raw(sizeof(TermNode)));
    *n = TermNode{};
    n->tag = Tag::Atom;
    n->functor = s;
    return n;
}

Term TermArena::integer(int64_t v) {
    auto* n = static_cast<TermNode*>(alloc_raw(sizeof(TermNode)));
    *n = TermNode{};
    n->tag = Tag::Int;
    n->ival = v;
    return n;
}

Term TermArena::variable(uint64_t id) {
    auto* n = static_cast<TermNode*>(alloc_raw(sizeof(TermNode)));
    *n = TermNode{};
    n->tag = Tag::Var;
    n->ival = static_cast<int64_t>(id);
    return n;
}

Term TermArena::make(Symbol functor, std::span<const Term> args) {
    assert(!args.empty());
    auto* slots = static_cast<Term*>(alloc_raw(sizeof(Term) * args.size()));
    for (size_t i = 0; i < args.size(); ++i) slots[i] = args[i];
    auto* n = static_cast<TermNode*>(alloc_raw(sizeof(TermNode)));
    *n = TermNode{};
    n->tag = Tag::Struct;
    n->functor = functor;
    n->arity = static_cast<uint32_t>(args.size());
    n->args = slots;
    return n;
}

const WellKnown& WellKnown::get() {
    static WellKnown wk = [] {
        WellKnown w;
        w.nil = intern("[]");
        w.dot = intern(".");
        w.comma = intern(",");
        w.neck = intern(":-");
        w.parallel = intern("parallel");
        w.slash = intern("/");
        w.truesym = intern("true");
        w.failsym = intern("fail");
        w.is_ = intern("is");
        w.write_ = intern("write");
        w.nl_ = intern("nl");
        w.unify = intern("=");
        w.eq = intern("==");
        w.neq = intern("\\==");
        w.lt = intern("<");
        w.gt = intern(">");
        w.le = intern("=<");
        w.ge = intern(">=");
        w.aeq = intern("=:=");
        w.ane = intern("=\\=");
        w.plus = intern("+");
        w.minus = intern("-");
        w.star = intern("*");
        w.intdiv = intern("//");
        w.mod_ = intern("mod");
        w.abs_ = intern("abs");
        return w;
    }();
    return wk;
}

bool is_nil(Term t) { return t->tag == Tag::Atom && t->functor == WellKnown::get().nil; }

bool is_list_cell(Term t) {
    return t->tag == Tag::Struct && t->arity == 2 && t->functor == WellKnown::get().dot;
}

bool term_equal(Term a, Term b) {
    if (a == b) return true;
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case Tag::Atom: return a->functor == b->functor;
        case Tag::Int: return a->ival == b->ival;
        case Tag::Var: return a->ival == b->ival;
        case Tag::Struct:
            if (a->functor != b->functor || a->arity != b->arity) return false;
            for (uint32_t i = 0; i < a->arity; ++i)
                if (!term_equal(a->args[i], b->args[i])) return false;
            return true;
    }
    return false;
}

}  // namespace orsplit
