#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "orsplit/term.hpp"

namespace orsplit {

struct PredKey {
    Symbol functor;
    uint32_t arity;
    auto operator<=>(const PredKey&) const = default;
};

/// A clause template. Terms live in the program's own arena; variables are
/// numbered 0..var_count-1 and renamed apart at every use.
struct Clause {
    Term head = nullptr;
    std::vector<Term> body;
    uint32_t var_count = 0;
    std::vector<std::string> var_names;  // for printing, indexed by template var id
};

/// First-argument discriminator used for clause indexing: a clause whose
/// first head argument is a variable matches anything; otherwise the goal's
/// first argument must agree on tag and principal functor/value.
struct FirstArg {
    bool any = true;  // variable first arg, or arity 0
    Tag tag = Tag::Var;
    Symbol functor = 0;
    uint32_t arity = 0;
    int64_t ival = 0;

    static FirstArg of_head(Term head);
    bool admits(Term goal_arg) const;  // goal_arg must be dereferenced
};

class Program {
public:
    const std::vector<Clause>& clauses() const { return clauses_; }
    const Clause& clause(uint32_t idx) const { return clauses_[idx]; }

    /// Clause indices for a predicate, in textual order. Empty when unknown.
    const std::vector<uint32_t>& candidates(PredKey key) const;
    const FirstArg& first_arg(uint32_t clause_idx) const { return first_args_[clause_idx]; }

    bool is_parallel(PredKey key) const { return parallel_.count(key) != 0; }
    const std::set<PredKey>& parallel_predicates() const { return parallel_; }

    uint32_t add_clause(Clause c);
    void declare_parallel(PredKey key) { parallel_.insert(key); }

    TermArena& arena() { return arena_; }

private:
    TermArena arena_;
    std::vector<Clause> clauses_;
    std::vector<FirstArg> first_args_;
    std::map<PredKey, std::vector<uint32_t>> index_;
    std::set<PredKey> parallel_;
    static const std::vector<uint32_t> kNoClauses;

    friend class Parser;
};

/// A parsed query: goal conjunction plus the query variables in order of
/// first appearance. Terms live in the owning program's arena.
struct Query {
    std::vector<Term> goals;
    std::vector<std::string> var_names;
    uint32_t var_count = 0;
};

PredKey pred_key(Term goal);

}  // namespace orsplit
