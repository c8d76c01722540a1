#include "orsplit/splitting.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace orsplit {

std::optional<Label> find_common_frontier(const std::vector<Label>& giver,
                                          const std::vector<Label>& receiver) {
    size_t n = std::min(giver.size(), receiver.size());
    std::optional<Label> last;
    for (size_t i = 0; i < n; ++i) {
        if (giver[i] != receiver[i]) break;
        last = giver[i];
    }
    return last;
}

SplitOutcome split_alternatives(SplitStrategy strategy, const std::vector<CpAlts>& newest_first,
                                double ratio) {
    size_t n = newest_first.size();
    SplitOutcome out;
    out.keep.resize(n);
    out.give.resize(n);
    switch (strategy) {
        case SplitStrategy::VerticalAlternate:
            for (size_t i = 0; i < n; ++i) {
                if (i % 2 == 0)
                    out.keep[i] = newest_first[i].alts;
                else
                    out.give[i] = newest_first[i].alts;
            }
            break;
        case SplitStrategy::VerticalBlock: {
            size_t kept = static_cast<size_t>(std::ceil(ratio * double(n)));
            kept = std::min(kept, n);
            for (size_t i = 0; i < n; ++i) {
                if (i < kept)
                    out.keep[i] = newest_first[i].alts;
                else
                    out.give[i] = newest_first[i].alts;
            }
            break;
        }
        case SplitStrategy::Horizontal:
            for (size_t i = 0; i < n; ++i) {
                const std::vector<uint32_t>& alts = newest_first[i].alts;
                size_t m = alts.size();
                size_t keep_n = m / 2;
                if (m % 2 == 1) keep_n += (i % 2 == 0) ? 1 : 0;
                out.keep[i].assign(alts.begin(), alts.begin() + keep_n);
                out.give[i].assign(alts.begin() + keep_n, alts.end());
            }
            break;
    }
    return out;
}

namespace {

void encode_trail(ByteWriter& w, const std::vector<TrailInstallEntry>& entries) {
    w.u32(static_cast<uint32_t>(entries.size()));
    for (const auto& e : entries) {
        w.u64(e.index);
        w.u64(e.var);
        w.u32(e.value_node);
    }
}

std::vector<TrailInstallEntry> decode_trail(ByteReader& r) {
    std::vector<TrailInstallEntry> out(r.u32());
    for (auto& e : out) {
        e.index = r.u64();
        e.var = r.u64();
        e.value_node = r.u32();
    }
    return out;
}

void encode_clause_list(ByteWriter& w, const std::vector<uint32_t>& v) {
    w.u32(static_cast<uint32_t>(v.size()));
    for (uint32_t c : v) w.u32(c);
}

std::vector<uint32_t> decode_clause_list(ByteReader& r) {
    std::vector<uint32_t> v(r.u32());
    for (uint32_t& c : v) c = r.u32();
    return v;
}

}  // namespace

std::vector<uint8_t> SharePayload::encode() const {
    ByteWriter w;
    w.u8(kWireVersion);
    w.u8(incremental ? 1 : 0);
    if (incremental) {
        w.u32(common.rank);
        w.u64(common.counter);
        w.u32(common.cp_index);
    }
    w.u64(var_count);
    w.u64(base_trail);
    w.u64(base_var);
    terms.encode(w);
    w.u32(static_cast<uint32_t>(cps.size()));
    for (const WireChoicePoint& cp : cps) {
        w.u32(cp.id.rank);
        w.u64(cp.id.serial);
        w.u8(cp.parallel ? 1 : 0);
        w.u64(cp.trail_mark);
        w.u64(cp.var_mark);
        w.u32(static_cast<uint32_t>(cp.goal_nodes.size()));
        for (uint32_t g : cp.goal_nodes) w.u32(g);
    }
    w.u32(static_cast<uint32_t>(label_segment.size()));
    for (const Label& l : label_segment) {
        w.u32(l.rank);
        w.u64(l.counter);
        w.u32(l.cp_index);
    }
    w.u32(static_cast<uint32_t>(repairs.size()));
    for (const RepairEntry& rep : repairs) {
        w.u32(rep.id.rank);
        w.u64(rep.id.serial);
        w.u8(rep.next_clause);
    }
    w.u32(static_cast<uint32_t>(assignment.size()));
    for (const SplitAssignment& a : assignment) {
        w.u32(a.id.rank);
        w.u64(a.id.serial);
        encode_clause_list(w, a.kept);
        encode_clause_list(w, a.given);
    }
    encode_trail(w, binding_installs);
    encode_trail(w, region_trail);
    w.u32(load_after);
    return std::move(w.buf);
}

SharePayload SharePayload::decode(std::span<const uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.u8() != kWireVersion) throw WireError("payload version mismatch");
    SharePayload p;
    p.incremental = r.u8() != 0;
    if (p.incremental) {
        p.common.rank = r.u32();
        p.common.counter = r.u64();
        p.common.cp_index = r.u32();
    }
    p.var_count = r.u64();
    p.base_trail = r.u64();
    p.base_var = r.u64();
    p.terms = TermGraph::decode(r);
    p.cps.resize(r.u32());
    for (WireChoicePoint& cp : p.cps) {
        cp.id.rank = r.u32();
        cp.id.serial = r.u64();
        cp.parallel = r.u8() != 0;
        cp.trail_mark = r.u64();
        cp.var_mark = r.u64();
        cp.goal_nodes.resize(r.u32());
        for (uint32_t& g : cp.goal_nodes) g = r.u32();
    }
    p.label_segment.resize(r.u32());
    for (Label& l : p.label_segment) {
        l.rank = r.u32();
        l.counter = r.u64();
        l.cp_index = r.u32();
    }
    p.repairs.resize(r.u32());
    for (RepairEntry& rep : p.repairs) {
        rep.id.rank = r.u32();
        rep.id.serial = r.u64();
        rep.next_clause = r.u8();
    }
    p.assignment.resize(r.u32());
    for (SplitAssignment& a : p.assignment) {
        a.id.rank = r.u32();
        a.id.serial = r.u64();
        a.kept = decode_clause_list(r);
        a.given = decode_clause_list(r);
    }
    p.binding_installs = decode_trail(r);
    p.region_trail = decode_trail(r);
    p.load_after = r.u32();
    return p;
}

SharePayload build_share_payload(const Engine& giver, std::optional<Label> common,
                                 SplitStrategy strategy, double ratio, bool top_most) {
    const std::vector<ChoicePoint>& stack = giver.stack();
    SharePayload p;
    size_t first_new = 0;  // index of the first cp to transfer
    if (common) {
        auto ch = giver.find_labeled_cp(*common);
        if (!ch) throw ProtocolError("common label not on giver stack");
        p.incremental = true;
        p.common = *common;
        p.base_trail = stack[*ch].trail_mark;
        p.base_var = stack[*ch].var_mark;
        first_new = *ch + 1;
    }

    // Split every parallel choice-point with untried alternatives; the list
    // handed to the partition function is ordered newest-first.
    std::vector<CpAlts> splittable;
    for (size_t i = stack.size(); i-- > 0;) {
        const ChoicePoint& cp = stack[i];
        if (cp.parallel && cp.next_clause == NextClause::Next && !cp.alternatives.empty()) {
            assert(cp.labeled);
            splittable.push_back({cp.id, cp.alternatives});
        }
    }
    SplitOutcome outcome;
    if (top_most && !splittable.empty()) {
        outcome.keep.resize(splittable.size());
        outcome.give.resize(splittable.size());
        for (size_t i = 0; i + 1 < splittable.size(); ++i) outcome.keep[i] = splittable[i].alts;
        outcome.give.back() = splittable.back().alts;  // oldest is last in newest-first order
    } else {
        outcome = split_alternatives(strategy, splittable, ratio);
    }
    // The receiver must obtain work: when the strategy hands it nothing,
    // reassign the oldest choice-point's alternatives wholesale.
    bool any_given = false;
    for (const auto& g : outcome.give) any_given |= !g.empty();
    if (!any_given && !splittable.empty()) {
        outcome.give.back() = splittable.back().alts;
        outcome.keep.back().clear();
    }
    for (size_t i = 0; i < splittable.size(); ++i)
        p.assignment.push_back({splittable[i].id, outcome.keep[i], outcome.give[i]});

    auto receiver_next = [&](const ChoicePoint& cp) -> uint8_t {
        for (const SplitAssignment& a : p.assignment)
            if (a.id == cp.id)
                return static_cast<uint8_t>(a.given.empty() ? NextClause::TrustFail
                                                            : NextClause::Next);
        return static_cast<uint8_t>(NextClause::TrustFail);
    };

    // Transferred segment: everything strictly newer than the frontier.
    for (size_t i = first_new; i < stack.size(); ++i) {
        const ChoicePoint& cp = stack[i];
        WireChoicePoint wcp;
        wcp.id = cp.id;
        wcp.parallel = cp.parallel;
        wcp.trail_mark = cp.trail_mark;
        wcp.var_mark = cp.var_mark;
        for (Term g : giver.goal_list(cp.goals)) wcp.goal_nodes.push_back(p.terms.add(g));
        p.cps.push_back(std::move(wcp));
    }

    // Labels travel alongside the transferred parallel choice-points; the
    // repairs cover parallel choice-points at or above the frontier.
    size_t seg_parallel = 0;
    for (size_t i = first_new; i < stack.size(); ++i)
        if (stack[i].parallel) ++seg_parallel;
    const auto& entries = giver.labels().entries;
    assert(entries.size() >= seg_parallel);
    for (size_t i = entries.size() - seg_parallel; i < entries.size(); ++i)
        p.label_segment.push_back(entries[i].label);
    for (size_t i = 0; i < first_new; ++i)
        if (stack[i].parallel) p.repairs.push_back({stack[i].id, receiver_next(stack[i])});

    // Value-trail segment above the frontier. Entries binding variables that
    // already existed at the frontier are the conditional installs.
    const std::vector<TrailEntry>& trail = giver.trail();
    for (uint64_t t = p.base_trail; t < trail.size(); ++t) {
        TrailInstallEntry e{t, trail[t].var, p.terms.add(trail[t].value)};
        if (trail[t].var < p.base_var)
            p.binding_installs.push_back(e);
        else
            p.region_trail.push_back(e);
    }

    p.var_count = giver.var_count();
    uint32_t load_after = 0;
    for (const SplitAssignment& a : p.assignment)
        if (!a.kept.empty()) ++load_after;
    p.load_after = load_after;
    return p;
}

void apply_giver_split(Engine& giver, const SharePayload& payload) {
    for (const SplitAssignment& a : payload.assignment) {
        auto idx = giver.find_cp(a.id);
        if (!idx) throw ProtocolError("split assignment names a missing choice-point");
        giver.set_alternatives(*idx, a.kept,
                               a.kept.empty() ? NextClause::TrustFail : NextClause::Next);
    }
    giver.place_schedule_sentinel();
}

void install_payload(Engine& receiver, const SharePayload& payload) {
    if (payload.incremental) {
        auto ch = receiver.find_labeled_cp(payload.common);
        if (!ch) throw ProtocolError("common label not on receiver stack");
        receiver.backtrack_to(*ch);
        if (receiver.trail_size() != payload.base_trail ||
            receiver.var_count() != payload.base_var)
            throw ProtocolError("common frontier state diverged between agents");
        if (receiver.labels().entries.empty() ||
            receiver.labels().entries.back().label != payload.common)
            throw ProtocolError("receiver label stack does not end at the common frontier");
    } else {
        receiver.reset_for_full_install();
    }

    // Materialize every transferred term; the heap mark of each installed
    // choice-point sits after the whole batch so that backtracking between
    // installed choice-points never reclaims shared payload terms.
    TermArena& arena = receiver.arena();
    payload.terms.reset_build_cache();
    std::vector<const GoalNode*> chains;
    chains.reserve(payload.cps.size());
    for (const WireChoicePoint& wcp : payload.cps) {
        std::vector<Term> goals;
        goals.reserve(wcp.goal_nodes.size());
        for (uint32_t idx : wcp.goal_nodes) goals.push_back(payload.terms.build(idx, arena));
        chains.push_back(receiver.make_goal_chain(goals));
    }
    std::vector<std::pair<TrailInstallEntry, Term>> merged;
    merged.reserve(payload.binding_installs.size() + payload.region_trail.size());
    for (const auto& e : payload.binding_installs)
        merged.emplace_back(e, payload.terms.build(e.value_node, arena));
    for (const auto& e : payload.region_trail)
        merged.emplace_back(e, payload.terms.build(e.value_node, arena));
    std::sort(merged.begin(), merged.end(),
              [](const auto& a, const auto& b) { return a.first.index < b.first.index; });

    size_t heap_mark = arena.mark();
    for (size_t i = 0; i < payload.cps.size(); ++i) {
        const WireChoicePoint& wcp = payload.cps[i];
        ChoicePoint cp;
        cp.id = wcp.id;
        cp.goals = chains[i];
        cp.next_clause = NextClause::TrustFail;  // refined by the assignment pass
        cp.trail_mark = wcp.trail_mark;
        cp.var_mark = wcp.var_mark;
        cp.heap_mark = heap_mark;
        cp.parallel = wcp.parallel;
        cp.labeled = wcp.parallel;
        receiver.install_choice_point(std::move(cp));
    }

    // Labels pair positionally with the installed parallel choice-points.
    {
        size_t li = 0;
        for (const WireChoicePoint& wcp : payload.cps) {
            if (!wcp.parallel) continue;
            if (li >= payload.label_segment.size())
                throw ProtocolError("label segment shorter than parallel segment");
            receiver.labels().entries.push_back({payload.label_segment[li], wcp.id});
            ++li;
        }
        if (li != payload.label_segment.size())
            throw ProtocolError("label segment longer than parallel segment");
    }

    receiver.set_var_count(payload.var_count);
    uint64_t expect = payload.base_trail;
    for (const auto& [e, value] : merged) {
        if (e.index != expect++) throw ProtocolError("trail segment not contiguous");
        receiver.install_binding(e.var, value);
    }

    // Receiver-side alternatives: split assignment for parallel choice-points,
    // trust_fail for everything else that travelled (sequential alternatives
    // stay with the giver).
    const std::vector<ChoicePoint>& stack = receiver.stack();
    size_t installed_from = stack.size() - payload.cps.size();
    for (size_t i = 0; i < stack.size(); ++i) {
        const ChoicePoint& cp = stack[i];
        if (cp.parallel) {
            const SplitAssignment* a = nullptr;
            for (const SplitAssignment& cand : payload.assignment)
                if (cand.id == cp.id) {
                    a = &cand;
                    break;
                }
            if (a)
                receiver.set_alternatives(i, a->given,
                                          a->given.empty() ? NextClause::TrustFail
                                                           : NextClause::Next);
            else
                receiver.set_alternatives(i, {}, NextClause::TrustFail);
        } else if (i >= installed_from) {
            receiver.set_alternatives(i, {}, NextClause::TrustFail);
        }
    }
    // Cross-check the explicit next-clause repairs for the common region.
    for (const RepairEntry& rep : payload.repairs) {
        auto idx = receiver.find_cp(rep.id);
        if (!idx) {
            if (payload.incremental) throw ProtocolError("repair names a missing choice-point");
            continue;  // full mode: the segment pass already covered it
        }
        if (static_cast<uint8_t>(stack[*idx].next_clause) != rep.next_clause)
            throw ProtocolError("next-clause repair disagrees with split assignment");
    }

    receiver.place_schedule_sentinel();
    receiver.enter_failure_mode();
}

}  // namespace orsplit
