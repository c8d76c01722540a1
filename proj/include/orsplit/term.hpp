#pragma once

#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace orsplit {

/// Interned functor/atom name. Ids are stable for the lifetime of the process,
/// so they can travel on the wire between agents of the same run.
using Symbol = uint32_t;

class SymbolTable {
public:
    static SymbolTable& instance();

    Symbol intern(std::string_view name);
    const std::string& name(Symbol s) const;

private:
    mutable std::mutex mtx_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, Symbol> ids_;
};

Symbol intern(std::string_view name);
const std::string& symbol_name(Symbol s);

enum class Tag : uint8_t { Atom, Int, Var, Struct };

struct TermNode;
using Term = const TermNode*;

struct TermNode {
    Tag tag;
    uint32_t functor = 0;  // Atom/Struct
    uint32_t arity = 0;    // Struct
    int64_t ival = 0;      // Int value, or Var id
    const Term* args = nullptr;

    uint64_t var_id() const { return static_cast<uint64_t>(ival); }
};

/// Bump allocator for term nodes and goal-list cells. Rewindable to a mark,
/// mirroring the heap discipline of a WAM: everything allocated after a
/// choice-point dies when execution backtracks past it.
class TermArena {
public:
    TermArena() = default;
    TermArena(const TermArena&) = delete;
    TermArena& operator=(const TermArena&) = delete;

    size_t mark() const { return used_; }
    void rewind(size_t m);
    void clear() { rewind(0); }
    size_t bytes_used() const { return used_; }

    Term atom(Symbol s);
    Term integer(int64_t v);
    Term variable(uint64_t id);
    Term make(Symbol functor, std::span<const Term> args);

    void* alloc_raw(size_t bytes);

private:
    static constexpr size_t kChunk = 1 << 18;
    std::vector<std::unique_ptr<char[]>> chunks_;
    size_t used_ = 0;  // logical offset; chunk boundaries consume address space
};

// Common atoms, interned once.
struct WellKnown {
    Symbol nil;          // []
    Symbol dot;          // '.' list constructor
    Symbol comma;
    Symbol neck;         // :-
    Symbol parallel;
    Symbol slash;
    Symbol truesym, failsym;
    Symbol is_, write_, nl_;
    Symbol unify, eq, neq, lt, gt, le, ge, aeq, ane;
    Symbol plus, minus, star, intdiv, mod_, abs_;
    static const WellKnown& get();
};

bool is_nil(Term t);
bool is_list_cell(Term t);

/// Structural equality after substituting nothing (raw tree compare).
bool term_equal(Term a, Term b);

}  // namespace orsplit
