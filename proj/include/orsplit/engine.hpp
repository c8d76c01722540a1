#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "orsplit/label.hpp"
#include "orsplit/ledger.hpp"
#include "orsplit/program.hpp"

namespace orsplit {

enum class NextClause : uint8_t {
    Next,       // take alternatives in order on backtracking
    TrustFail,  // filler: no local alternatives here
    Schedule,   // backtracking into this choice-point enters the scheduler
};

struct GoalNode {
    Term goal;
    const GoalNode* next;
};

struct ChoicePoint {
    CreationId id;
    const GoalNode* goals = nullptr;  // snapshot; head is the call being retried
    std::vector<uint32_t> alternatives;
    NextClause next_clause = NextClause::Next;
    uint64_t trail_mark = 0;
    uint64_t var_mark = 0;
    size_t heap_mark = 0;
    bool parallel = false;
    bool labeled = false;
};

struct TrailEntry {
    uint64_t var;
    Term value;
};

enum class EventKind : uint8_t { Solution, SideEffect, PollPoint, ScheduleHit, Exhausted };

struct EngineEvent {
    EventKind kind;
    std::string text;         // Solution: rendered answer; SideEffect: output chunk
    uint64_t reductions = 0;  // PollPoint: call reductions since the previous poll
};

struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Sequential Prolog-subset resolution engine. One instance per agent; never
/// touched by two threads at once. State moves between agents only through
/// the serialized share payloads built by the splitting module.
class Engine {
public:
    Engine(uint32_t rank, std::shared_ptr<const Program> program);

    uint32_t rank() const { return rank_; }
    const Program& program() const { return *program_; }

    /// Registers the query on every agent so variable numbering is aligned
    /// across ranks; only the first running agent calls start().
    void register_query(const Query& query);
    void start();
    bool started() const { return started_; }

    void set_parallel_root(bool on) { parallel_root_ = on; }
    void set_poll_quantum(uint64_t quantum) { poll_quantum_ = quantum; }
    void set_ledger(ExecutionLedger* ledger) { ledger_ = ledger; }

    EngineEvent run_until_event();

    /// Pops every choice-point deeper than `depth`, untrails to the target's
    /// trail mark and rewinds variable/heap allocation to its creation state.
    void backtrack_to(size_t depth);

    // -- state inspection ----------------------------------------------------
    const std::vector<ChoicePoint>& stack() const { return stack_; }
    const std::vector<TrailEntry>& trail() const { return trail_; }
    uint64_t var_count() const { return var_count_; }
    LabelStack& labels() { return labels_; }
    const LabelStack& labels() const { return labels_; }
    Term binding(uint64_t var) const { return var < bind_.size() ? bind_[var] : nullptr; }
    Term deref(Term t) const;

    /// Number of parallel choice-points with untried alternatives (the
    /// work-load approximation used by the scheduler).
    uint32_t parallel_load() const;

    bool has_local_work() const;
    uint64_t alternatives_executed() const { return alternatives_executed_; }

    /// Unification entry point: extends the store with an mgu on success and
    /// value-trails every new binding; restores the pre-call trail mark on
    /// failure. No occurs-check.
    bool unify_terms(Term a, Term b) { return unify(a, b); }
    uint64_t new_vars(uint32_t n) { return fresh_vars(n); }
    uint64_t trail_size() const { return trail_.size(); }
    void undo_to(uint64_t trail_mark) { untrail_to(trail_mark); }

    std::string render(Term t) const;
    std::string state_fingerprint() const;  // test support: observable state digest

    // -- installation surface (used by the splitting module) ------------------
    TermArena& arena() { return arena_; }
    std::optional<size_t> find_cp(CreationId id) const;
    std::optional<size_t> find_labeled_cp(const Label& label) const;
    const GoalNode* make_goal_chain(const std::vector<Term>& goals);
    std::vector<Term> goal_list(const GoalNode* chain) const;

    void reset_for_full_install();
    void install_choice_point(ChoicePoint cp);
    void install_binding(uint64_t var, Term value);  // appends a value-trail entry
    void set_var_count(uint64_t n);
    void set_alternatives(size_t depth, std::vector<uint32_t> alts, NextClause next);
    void place_schedule_sentinel();
    void enter_failure_mode();  // resume by backtracking into assigned work

    /// Start of every give-work round: labels unlabeled parallel choice-points
    /// bottom-up; the epoch counter advances once per round that created at
    /// least one label.
    void label_parallel_choicepoints();

    /// Synthetic GC hook: drops every label, preserving the epoch counter.
    /// The next give-work interaction from this agent falls back to full copy.
    void invalidate_labels();

private:
    enum class Mode : uint8_t { Idle, Forward, Backtrack };

    uint32_t rank_;
    std::shared_ptr<const Program> program_;
    TermArena arena_;

    std::vector<Term> bind_;
    uint64_t var_count_ = 0;
    std::vector<TrailEntry> trail_;
    std::vector<ChoicePoint> stack_;
    LabelStack labels_;

    const GoalNode* goals_ = nullptr;
    Mode mode_ = Mode::Idle;
    bool started_ = false;
    bool parallel_root_ = false;

    uint64_t poll_quantum_ = 0;
    uint64_t since_poll_ = 0;
    uint64_t cp_serial_ = 0;
    std::vector<uint32_t> cand_scratch_;
    std::vector<std::pair<Term, Term>> unify_scratch_;
    uint64_t alternatives_executed_ = 0;
    ExecutionLedger* ledger_ = nullptr;

    std::vector<std::string> query_var_names_;
    uint32_t query_var_count_ = 0;
    std::vector<Term> query_goals_;

    uint64_t fresh_vars(uint32_t n);
    Term instantiate(Term t, uint64_t base);
    void bind(uint64_t var, Term value);
    void untrail_to(uint64_t mark);
    bool unify(Term a, Term b);
    bool match_template(Term tmpl, Term actual, uint64_t base);
    void pop_cp();
    std::optional<EngineEvent> do_backtrack();
    bool try_clause(uint32_t clause_idx, Term goal, const GoalNode* rest);
    int64_t eval_arith(Term t) const;
    std::optional<EngineEvent> exec_builtin(Term goal, PredKey key);
    std::string render_answer() const;
    void render_term(std::ostream& os, Term t, std::vector<std::pair<uint64_t, char>>& anon) const;
};

struct SequentialResult {
    std::vector<std::string> solutions;  // in depth-first order
    std::string output;                  // concatenated side effects
};

/// The sequential oracle: all (or the first `limit`) answers in standard
/// Prolog order, with captured side-effect output.
SequentialResult collect_solutions(std::shared_ptr<const Program> program, const Query& query,
                                   std::optional<uint64_t> limit = std::nullopt);

}  // namespace orsplit
