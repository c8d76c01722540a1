#include "orsplit/engine.hpp"

#include <cassert>
#include <sstream>

namespace orsplit {

Engine::Engine(uint32_t rank, std::shared_ptr<const Program> program)
    : rank_(rank), program_(std::move(program)) {}

void Engine::register_query(const Query& query) {
    query_var_names_ = query.var_names;
    query_var_count_ = query.var_count;
    fresh_vars(query.var_count);
    query_goals_.clear();
    for (Term g : query.goals) query_goals_.push_back(instantiate(g, 0));
}

void Engine::start() {
    goals_ = make_goal_chain(query_goals_);
    mode_ = Mode::Forward;
    started_ = true;
}

uint64_t Engine::fresh_vars(uint32_t n) {
    uint64_t base = var_count_;
    var_count_ += n;
    bind_.resize(var_count_, nullptr);
    return base;
}

Term Engine::instantiate(Term t, uint64_t base) {
    switch (t->tag) {
        case Tag::Atom:
        case Tag::Int: return t;  // ground leaves are shared
        case Tag::Var: return arena_.variable(base + t->var_id());
        case Tag::Struct: break;
    }
    std::vector<Term> args(t->arity);
    for (uint32_t i = 0; i < t->arity; ++i) args[i] = instantiate(t->args[i], base);
    return arena_.make(t->functor, args);
}

Term Engine::deref(Term t) const {
    while (t->tag == Tag::Var) {
        uint64_t id = t->var_id();
        if (id >= bind_.size() || bind_[id] == nullptr) return t;
        t = bind_[id];
    }
    return t;
}

void Engine::bind(uint64_t var, Term value) {
    assert(var < bind_.size() && bind_[var] == nullptr);
    bind_[var] = value;
    trail_.push_back({var, value});
}

void Engine::untrail_to(uint64_t mark) {
    while (trail_.size() > mark) {
        bind_[trail_.back().var] = nullptr;
        trail_.pop_back();
    }
}

bool Engine::unify(Term a, Term b) {
    uint64_t mark = trail_.size();
    std::vector<std::pair<Term, Term>>& todo = unify_scratch_;
    todo.clear();
    todo.emplace_back(a, b);
    while (!todo.empty()) {
        auto [x, y] = todo.back();
        todo.pop_back();
        x = deref(x);
        y = deref(y);
        if (x == y) continue;
        if (x->tag == Tag::Var && y->tag == Tag::Var) {
            if (x->var_id() == y->var_id()) continue;
            // bind the younger variable to the older one
            if (x->var_id() > y->var_id())
                bind(x->var_id(), y);
            else
                bind(y->var_id(), x);
            continue;
        }
        if (x->tag == Tag::Var) {
            bind(x->var_id(), y);
            continue;
        }
        if (y->tag == Tag::Var) {
            bind(y->var_id(), x);
            continue;
        }
        if (x->tag != y->tag) goto fail;
        switch (x->tag) {
            case Tag::Atom:
                if (x->functor != y->functor) goto fail;
                break;
            case Tag::Int:
                if (x->ival != y->ival) goto fail;
                break;
            case Tag::Struct:
                if (x->functor != y->functor || x->arity != y->arity) goto fail;
                for (uint32_t i = 0; i < x->arity; ++i) todo.emplace_back(x->args[i], y->args[i]);
                break;
            default: goto fail;
        }
    }
    return true;
fail:
    untrail_to(mark);
    return false;
}

void Engine::pop_cp() {
    const ChoicePoint& cp = stack_.back();
    if (cp.labeled) {
        assert(!labels_.entries.empty() && labels_.entries.back().cp == cp.id);
        labels_.entries.pop_back();
    }
    stack_.pop_back();
}

// Unifies `actual` against a clause-template subterm without building the
// head structure first. Produces exactly the bindings and trail entries the
// instantiate-then-unify route would.
bool Engine::match_template(Term tmpl, Term actual, uint64_t base) {
    switch (tmpl->tag) {
        case Tag::Var: {
            uint64_t vid = base + tmpl->var_id();
            if (bind_[vid] == nullptr) {
                Term value = deref(actual);
                if (value->tag == Tag::Var && value->var_id() == vid) return true;
                // a template variable is always the youngest party
                if (value->tag == Tag::Var && value->var_id() > vid) {
                    bind(value->var_id(), arena_.variable(vid));
                    return true;
                }
                bind(vid, value);
                return true;
            }
            return unify(bind_[vid], actual);
        }
        case Tag::Atom: {
            Term a = deref(actual);
            if (a->tag == Tag::Var) {
                bind(a->var_id(), tmpl);
                return true;
            }
            return a->tag == Tag::Atom && a->functor == tmpl->functor;
        }
        case Tag::Int: {
            Term a = deref(actual);
            if (a->tag == Tag::Var) {
                bind(a->var_id(), tmpl);
                return true;
            }
            return a->tag == Tag::Int && a->ival == tmpl->ival;
        }
        case Tag::Struct: {
            Term a = deref(actual);
            if (a->tag == Tag::Var) {
                bind(a->var_id(), instantiate(tmpl, base));
                return true;
            }
            if (a->tag != Tag::Struct || a->functor != tmpl->functor || a->arity != tmpl->arity)
                return false;
            for (uint32_t i = 0; i < tmpl->arity; ++i)
                if (!match_template(tmpl->args[i], a->args[i], base)) return false;
            return true;
        }
    }
    return false;
}

bool Engine::try_clause(uint32_t clause_idx, Term goal, const GoalNode* rest) {
    if (clause_idx >= program_->clauses().size())
        throw EngineError("malformed clause reference");
    const Clause& c = program_->clause(clause_idx);
    uint64_t base = fresh_vars(c.var_count);
    uint64_t mark = trail_.size();
    Term g = deref(goal);
    bool matched = true;
    if (g->tag == Tag::Struct) {
        for (uint32_t i = 0; i < g->arity && matched; ++i)
            matched = match_template(c.head->args[i], g->args[i], base);
    }
    if (!matched) {
        untrail_to(mark);
        return false;
    }
    const GoalNode* chain = rest;
    for (auto it = c.body.rbegin(); it != c.body.rend(); ++it) {
        auto* cell = static_cast<GoalNode*>(arena_.alloc_raw(sizeof(GoalNode)));
        cell->goal = instantiate(*it, base);
        cell->next = chain;
        chain = cell;
    }
    goals_ = chain;
    mode_ = Mode::Forward;
    return true;
}

std::optional<EngineEvent> Engine::do_backtrack() {
    for (;;) {
        if (stack_.empty()) {
            goals_ = nullptr;
            mode_ = Mode::Idle;
            return EngineEvent{parallel_root_ ? EventKind::ScheduleHit : EventKind::Exhausted};
        }
        ChoicePoint& cp = stack_.back();
        untrail_to(cp.trail_mark);
        bind_.resize(cp.var_mark);
        var_count_ = cp.var_mark;
        arena_.rewind(cp.heap_mark);
        if (cp.next_clause == NextClause::Schedule) {
            goals_ = nullptr;
            mode_ = Mode::Idle;
            return EngineEvent{EventKind::ScheduleHit};
        }
        if (cp.next_clause == NextClause::TrustFail || cp.alternatives.empty()) {
            pop_cp();
            continue;
        }
        uint32_t clause = cp.alternatives.front();
        cp.alternatives.erase(cp.alternatives.begin());
        if (ledger_) ledger_->executed(cp.id, clause, rank_);
        ++alternatives_executed_;
        Term g = deref(cp.goals->goal);
        const GoalNode* rest = cp.goals->next;
        if (cp.alternatives.empty()) pop_cp();  // trust: last alternative taken
        if (try_clause(clause, g, rest)) return std::nullopt;
    }
}

namespace {

bool is_builtin_key(PredKey key) {
    const WellKnown& wk = WellKnown::get();
    if (key.arity == 0)
        return key.functor == wk.truesym || key.functor == wk.failsym || key.functor == wk.nl_;
    if (key.arity == 1) return key.functor == wk.write_;
    if (key.arity == 2)
        return key.functor == wk.unify || key.functor == wk.eq || key.functor == wk.neq ||
               key.functor == wk.is_ || key.functor == wk.lt || key.functor == wk.gt ||
               key.functor == wk.le || key.functor == wk.ge || key.functor == wk.aeq ||
               key.functor == wk.ane;
    return false;
}

}  // namespace

int64_t Engine::eval_arith(Term t) const {
    t = deref(t);
    const WellKnown& wk = WellKnown::get();
    if (t->tag == Tag::Int) return t->ival;
    if (t->tag == Tag::Struct && t->arity == 2) {
        int64_t a = eval_arith(t->args[0]);
        int64_t b = eval_arith(t->args[1]);
        if (t->functor == wk.plus) return a + b;
        if (t->functor == wk.minus) return a - b;
        if (t->functor == wk.star) return a * b;
        if (t->functor == wk.intdiv) {
            if (b == 0) throw EngineError("division by zero");
            return a / b;
        }
        if (t->functor == wk.mod_) {
            if (b == 0) throw EngineError("division by zero");
            return ((a % b) + b) % b;
        }
    }
    if (t->tag == Tag::Struct && t->arity == 1) {
        if (t->functor == wk.minus) return -eval_arith(t->args[0]);
        if (t->functor == wk.abs_) {
            int64_t v = eval_arith(t->args[0]);
            return v < 0 ? -v : v;
        }
    }
    throw EngineError("non-evaluable arithmetic term");
}

namespace {

bool equal_deref(const Engine& e, Term a, Term b) {
    a = e.deref(a);
    b = e.deref(b);
    if (a == b) return true;
    if (a->tag != b->tag) return false;
    switch (a->tag) {
        case Tag::Atom: return a->functor == b->functor;
        case Tag::Int: return a->ival == b->ival;
        case Tag::Var: return a->var_id() == b->var_id();
        case Tag::Struct:
            if (a->functor != b->functor || a->arity != b->arity) return false;
            for (uint32_t i = 0; i < a->arity; ++i)
                if (!equal_deref(e, a->args[i], b->args[i])) return false;
            return true;
    }
    return false;
}

}  // namespace

std::optional<EngineEvent> Engine::exec_builtin(Term goal, PredKey key) {
    const WellKnown& wk = WellKnown::get();
    const GoalNode* rest = goals_->next;
    auto succeed = [&] { goals_ = rest; };
    auto fail = [&] { mode_ = Mode::Backtrack; };

    if (key.functor == wk.truesym) {
        succeed();
        return std::nullopt;
    }
    if (key.functor == wk.failsym) {
        fail();
        return std::nullopt;
    }
    if (key.functor == wk.nl_) {
        succeed();
        return EngineEvent{EventKind::SideEffect, "\n"};
    }
    if (key.functor == wk.write_) {
        std::string text = render(goal->args[0]);
        succeed();
        return EngineEvent{EventKind::SideEffect, std::move(text)};
    }
    Term a = goal->args[0];
    Term b = goal->args[1];
    if (key.functor == wk.unify) {
        if (unify(a, b))
            succeed();
        else
            fail();
        return std::nullopt;
    }
    if (key.functor == wk.eq || key.functor == wk.neq) {
        bool eq = equal_deref(*this, a, b);
        if (eq == (key.functor == wk.eq))
            succeed();
        else
            fail();
        return std::nullopt;
    }
    if (key.functor == wk.is_) {
        int64_t v = eval_arith(b);
        if (unify(a, arena_.integer(v)))
            succeed();
        else
            fail();
        return std::nullopt;
    }
    int64_t x = eval_arith(a);
    int64_t y = eval_arith(b);
    bool ok;
    if (key.functor == wk.lt)
        ok = x < y;
    else if (key.functor == wk.gt)
        ok = x > y;
    else if (key.functor == wk.le)
        ok = x <= y;
    else if (key.functor == wk.ge)
        ok = x >= y;
    else if (key.functor == wk.aeq)
        ok = x == y;
    else if (key.functor == wk.ane)
        ok = x != y;
    else
        throw EngineError("unknown builtin");
    if (ok)
        succeed();
    else
        fail();
    return std::nullopt;
}

EngineEvent Engine::run_until_event() {
    for (;;) {
        if (mode_ == Mode::Idle) mode_ = Mode::Backtrack;
        if (mode_ == Mode::Backtrack) {
            if (auto ev = do_backtrack()) return *ev;
        }
        if (goals_ == nullptr) {
            mode_ = Mode::Backtrack;
            return EngineEvent{EventKind::Solution, render_answer()};
        }
        Term g = deref(goals_->goal);
        if (g->tag == Tag::Var) throw EngineError("unbound goal");
        if (g->tag == Tag::Int) throw EngineError("integer as goal");
        PredKey key = pred_key(g);
        if (is_builtin_key(key)) {
            if (auto ev = exec_builtin(g, key)) return *ev;
            continue;
        }
        if (poll_quantum_ != 0 && since_poll_ >= poll_quantum_) {
            uint64_t n = since_poll_;
            since_poll_ = 0;
            return EngineEvent{EventKind::PollPoint, {}, n};
        }
        ++since_poll_;
        const std::vector<uint32_t>& all = program_->candidates(key);
        const std::vector<uint32_t>* matching = &all;
        if (g->tag == Tag::Struct && !all.empty()) {
            // first-argument indexing
            Term fa = deref(g->args[0]);
            if (fa->tag != Tag::Var) {
                cand_scratch_.clear();
                bool dropped = false;
                for (uint32_t idx : all) {
                    if (program_->first_arg(idx).admits(fa))
                        cand_scratch_.push_back(idx);
                    else
                        dropped = true;
                }
                if (dropped) matching = &cand_scratch_;
            }
        }
        const std::vector<uint32_t>& cands = *matching;
        const GoalNode* rest = goals_->next;
        if (cands.empty()) {
            mode_ = Mode::Backtrack;
            continue;
        }
        if (cands.size() > 1) {
            ChoicePoint cp;
            cp.id = {rank_, cp_serial_++};
            cp.goals = goals_;
            cp.alternatives.assign(cands.begin() + 1, cands.end());
            cp.next_clause = NextClause::Next;
            cp.trail_mark = trail_.size();
            cp.var_mark = var_count_;
            cp.heap_mark = arena_.mark();
            cp.parallel = program_->is_parallel(key);
            if (ledger_) {
                ledger_->created(cp.id, cands);
                ledger_->executed(cp.id, cands[0], rank_);
            }
            ++alternatives_executed_;
            stack_.push_back(std::move(cp));
        }
        if (!try_clause(cands[0], g, rest)) mode_ = Mode::Backtrack;
    }
}

void Engine::backtrack_to(size_t depth) {
    if (depth >= stack_.size()) throw EngineError("backtrack_to: depth out of range");
    while (stack_.size() > depth + 1) {
        const ChoicePoint& cp = stack_.back();
        untrail_to(cp.trail_mark);
        bind_.resize(cp.var_mark);
        var_count_ = cp.var_mark;
        arena_.rewind(cp.heap_mark);
        pop_cp();
    }
    const ChoicePoint& target = stack_.back();
    untrail_to(target.trail_mark);
    bind_.resize(target.var_mark);
    var_count_ = target.var_mark;
    arena_.rewind(target.heap_mark);
    goals_ = nullptr;
    mode_ = Mode::Idle;
}

uint32_t Engine::parallel_load() const {
    uint32_t n = 0;
    for (const ChoicePoint& cp : stack_)
        if (cp.parallel && cp.next_clause == NextClause::Next && !cp.alternatives.empty()) ++n;
    return n;
}

bool Engine::has_local_work() const {
    for (const ChoicePoint& cp : stack_)
        if (cp.next_clause == NextClause::Next && !cp.alternatives.empty()) return true;
    return false;
}

std::optional<size_t> Engine::find_cp(CreationId id) const {
    for (size_t i = 0; i < stack_.size(); ++i)
        if (stack_[i].id == id) return i;
    return std::nullopt;
}

std::optional<size_t> Engine::find_labeled_cp(const Label& label) const {
    for (const LabelEntry& e : labels_.entries)
        if (e.label == label) return find_cp(e.cp);
    return std::nullopt;
}

const GoalNode* Engine::make_goal_chain(const std::vector<Term>& goals) {
    const GoalNode* chain = nullptr;
    for (auto it = goals.rbegin(); it != goals.rend(); ++it) {
        auto* cell = static_cast<GoalNode*>(arena_.alloc_raw(sizeof(GoalNode)));
        cell->goal = *it;
        cell->next = chain;
        chain = cell;
    }
    return chain;
}

std::vector<Term> Engine::goal_list(const GoalNode* chain) const {
    std::vector<Term> out;
    for (; chain; chain = chain->next) out.push_back(chain->goal);
    return out;
}

void Engine::reset_for_full_install() {
    arena_.clear();
    bind_.clear();
    var_count_ = 0;
    trail_.clear();
    stack_.clear();
    labels_.entries.clear();
    goals_ = nullptr;
    mode_ = Mode::Idle;
}

void Engine::install_choice_point(ChoicePoint cp) { stack_.push_back(std::move(cp)); }

void Engine::install_binding(uint64_t var, Term value) {
    if (var >= bind_.size()) throw EngineError("binding install outside variable range");
    if (bind_[var] != nullptr) throw EngineError("binding install over bound variable");
    bind_[var] = value;
    trail_.push_back({var, value});
}

void Engine::set_var_count(uint64_t n) {
    var_count_ = n;
    bind_.resize(n, nullptr);
}

void Engine::set_alternatives(size_t depth, std::vector<uint32_t> alts, NextClause next) {
    ChoicePoint& cp = stack_.at(depth);
    cp.alternatives = std::move(alts);
    cp.next_clause = next;
}

void Engine::place_schedule_sentinel() {
    for (ChoicePoint& cp : stack_)
        if (cp.next_clause == NextClause::Schedule) cp.next_clause = NextClause::TrustFail;
    size_t oldest_owned = stack_.size();
    for (size_t i = 0; i < stack_.size(); ++i) {
        if (stack_[i].next_clause == NextClause::Next && !stack_[i].alternatives.empty()) {
            oldest_owned = i;
            break;
        }
    }
    if (oldest_owned == stack_.size()) {
        // nothing owned: park the sentinel on top so the whole branch (and
        // its labels) survives into the scheduling state
        if (!stack_.empty()) stack_.back().next_clause = NextClause::Schedule;
    } else if (oldest_owned > 0) {
        stack_[oldest_owned - 1].next_clause = NextClause::Schedule;
    }
}

void Engine::enter_failure_mode() {
    goals_ = nullptr;
    mode_ = Mode::Backtrack;
    started_ = true;
}

void Engine::label_parallel_choicepoints() {
    bool created = false;
    uint32_t parallel_index = 0;
    for (ChoicePoint& cp : stack_) {
        if (!cp.parallel) continue;
        if (!cp.labeled) {
            labels_.entries.push_back({Label{rank_, labels_.counter, parallel_index}, cp.id});
            cp.labeled = true;
            created = true;
        }
        ++parallel_index;
    }
    if (created) ++labels_.counter;
}

void Engine::invalidate_labels() {
    labels_.entries.clear();
    for (ChoicePoint& cp : stack_) cp.labeled = false;
}

namespace {

void render_var_ref(std::ostream& os, uint64_t id, std::vector<std::pair<uint64_t, char>>& anon) {
    for (auto& [v, c] : anon)
        if (v == id) {
            os << '_' << c;
            return;
        }
    char c = static_cast<char>('A' + (anon.size() % 26));
    anon.emplace_back(id, c);
    os << '_' << c;
}

// Structural print with raw variable ids; no dereferencing. Test support.
void raw_print(std::ostream& os, Term t) {
    switch (t->tag) {
        case Tag::Int: os << t->ival; return;
        case Tag::Atom: os << symbol_name(t->functor); return;
        case Tag::Var: os << "_G" << t->var_id(); return;
        case Tag::Struct:
            os << symbol_name(t->functor) << '(';
            for (uint32_t i = 0; i < t->arity; ++i) {
                if (i) os << ',';
                raw_print(os, t->args[i]);
            }
            os << ')';
            return;
    }
}

}  // namespace

void Engine::render_term(std::ostream& os, Term t,
                         std::vector<std::pair<uint64_t, char>>& anon) const {
    t = deref(t);
    switch (t->tag) {
        case Tag::Int: os << t->ival; return;
        case Tag::Atom: os << symbol_name(t->functor); return;
        case Tag::Var: render_var_ref(os, t->var_id(), anon); return;
        case Tag::Struct: break;
    }
    if (is_list_cell(t)) {
        os << '[';
        render_term(os, t->args[0], anon);
        Term tail = deref(t->args[1]);
        while (is_list_cell(tail)) {
            os << ',';
            render_term(os, tail->args[0], anon);
            tail = deref(tail->args[1]);
        }
        if (!is_nil(tail)) {
            os << '|';
            render_term(os, tail, anon);
        }
        os << ']';
        return;
    }
    os << symbol_name(t->functor) << '(';
    for (uint32_t i = 0; i < t->arity; ++i) {
        if (i) os << ',';
        render_term(os, t->args[i], anon);
    }
    os << ')';
}

std::string Engine::render(Term t) const {
    std::ostringstream os;
    std::vector<std::pair<uint64_t, char>> anon;
    render_term(os, t, anon);
    return os.str();
}

std::string Engine::render_answer() const {
    std::ostringstream os;
    std::vector<std::pair<uint64_t, char>> anon;
    bool first = true;
    for (uint32_t i = 0; i < query_var_count_; ++i) {
        if (query_var_names_[i] == "_") continue;
        if (!first) os << ", ";
        first = false;
        os << query_var_names_[i] << " = ";
        Term v = i < bind_.size() ? bind_[i] : nullptr;
        if (v == nullptr)
            render_var_ref(os, i, anon);
        else
            render_term(os, v, anon);
    }
    if (first) os << "true";
    return os.str();
}

std::string Engine::state_fingerprint() const {
    std::ostringstream os;
    os << "vars=" << var_count_ << "\n";
    os << "trail:";
    for (const TrailEntry& e : trail_) {
        os << " (" << e.var << "=";
        raw_print(os, e.value);
        os << ")";
    }
    os << "\nbindings:";
    for (uint64_t v = 0; v < var_count_; ++v) {
        if (bind_[v]) {
            os << " " << v << "->";
            raw_print(os, bind_[v]);
        }
    }
    os << "\nstack:\n";
    for (const ChoicePoint& cp : stack_) {
        os << "  cp " << cp.id.rank << ":" << cp.id.serial << " par=" << cp.parallel
           << " lab=" << cp.labeled << " next=" << int(cp.next_clause) << " tm=" << cp.trail_mark
           << " vm=" << cp.var_mark << " alts=[";
        for (size_t i = 0; i < cp.alternatives.size(); ++i)
            os << (i ? "," : "") << cp.alternatives[i];
        os << "] goals=[";
        for (const GoalNode* g = cp.goals; g; g = g->next) {
            raw_print(os, g->goal);
            if (g->next) os << ",";
        }
        os << "]\n";
    }
    os << "labels:";
    for (const LabelEntry& e : labels_.entries)
        os << " (" << e.label.rank << "," << e.label.counter << "," << e.label.cp_index << ")";
    os << "\n";
    return os.str();
}

SequentialResult collect_solutions(std::shared_ptr<const Program> program, const Query& query,
                                   std::optional<uint64_t> limit) {
    SequentialResult result;
    Engine engine(0, std::move(program));
    engine.register_query(query);
    engine.start();
    if (limit && *limit == 0) return result;
    for (;;) {
        EngineEvent ev = engine.run_until_event();
        switch (ev.kind) {
            case EventKind::Solution:
                result.solutions.push_back(ev.text);
                if (limit && result.solutions.size() >= *limit) return result;
                break;
            case EventKind::SideEffect: result.output += ev.text; break;
            case EventKind::Exhausted: return result;
            default: throw EngineError("unexpected engine event in sequential run");
        }
    }
}

}  // namespace orsplit
