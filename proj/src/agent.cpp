#include "orsplit/agent.hpp"

#include <algorithm>
#include <cassert>

namespace orsplit {

Agent::Agent(const AgentConfig& cfg, std::shared_ptr<const Program> program, const Query& query,
             Bus& bus, RunSinks& sinks, ExecutionLedger* ledger)
    : cfg_(cfg),
      engine_(cfg.rank, std::move(program)),
      bus_(bus),
      sinks_(sinks),
      loads_(cfg.agents, cfg.rank),
      dedup_(cfg.agents) {
    engine_.register_query(query);
    engine_.set_parallel_root(true);
    engine_.set_poll_quantum(std::max<uint64_t>(1, cfg.poll_frequency / 4));
    engine_.set_ledger(ledger);
    token_.attach(cfg.rank, cfg.agents);
    lv_.init_first_running(first_running_rank());
    // everyone knows the first running agent holds the root task
    loads_.set(first_running_rank(), 1);
}

void Agent::start_running() {
    engine_.start();
    state_ = AgentState::Running;
}

Message Agent::base_msg(MsgKind kind) const {
    Message m;
    m.kind = kind;
    m.src = cfg_.rank;
    m.src_load = state_ == AgentState::Scheduling ? 0 : engine_.parallel_load();
    return m;
}

bool Agent::step() {
    switch (state_) {
        case AgentState::Halted: return false;
        case AgentState::Running: return step_running();
        case AgentState::Scheduling: return step_scheduling();
        case AgentState::OrderSensitive: return step_order_sensitive();
    }
    return false;
}

// ---------------------------------------------------------------------------
// shared message plumbing

void Agent::handle_common_load(const Message& m) {
    if (m.kind == MsgKind::SendLoadInfo || m.kind == MsgKind::Halt) return;
    loads_.set(m.src, m.src_load);
}

void Agent::handle_load_info(const Message& m) {
    loads_.set(m.giver, m.giver_load);
    loads_.set(m.receiver, m.receiver_load);
    if (m.giver == m.receiver) return;  // plain load refresh
    if (dedup_.record(m.giver, m.receiver, m.src)) {
        lv_.place_after(m.giver, m.receiver);
        if (state_ == AgentState::OrderSensitive && m.receiver != cfg_.rank &&
            lv_.is_left_of(m.receiver, cfg_.rank)) {
            // the sharing moved an agent to our left: it must be asked too
            Message req = base_msg(MsgKind::RequestOsc);
            bus_.send(cfg_.rank, m.receiver, req);
        }
    }
}

void Agent::halt_self() { state_ = AgentState::Halted; }

void Agent::broadcast_halt() {
    Message halt = base_msg(MsgKind::Halt);
    bus_.broadcast(cfg_.rank, halt);
}

void Agent::process_token(const Message& m) {
    TokenState::TokenAction act = token_.on_token_idle(m);
    if (act.forward) {
        uint32_t next = (cfg_.rank + 1) % cfg_.agents;
        bus_.send(cfg_.rank, next, *act.forward);
    }
    if (act.confirmed) {
        broadcast_halt();
        halt_self();
    }
    if (act.returned) ++stats_.token_rounds;
}

void Agent::release_held_tokens() {
    std::vector<Message> held = std::move(held_tokens_);
    held_tokens_.clear();
    for (const Message& m : held) {
        if (state_ == AgentState::Halted) return;
        process_token(m);
    }
}

// ---------------------------------------------------------------------------
// running state

bool Agent::step_running() {
    // load updates are drained at every poll point, other messages at every
    // fourth (work requests are considered less frequently)
    for (const Message& m : bus_.poll(cfg_.rank, MsgKind::SendLoadInfo)) handle_load_info(m);
    ++polls_;
    if (polls_ % 4 == 0) {
        loads_.set(cfg_.rank, engine_.parallel_load());
        if (cfg_.load_propagation != 0 && polls_ % (4 * uint64_t(cfg_.load_propagation)) == 0)
            send_load_refresh();
        for (const Message& m : bus_.poll(cfg_.rank)) {
            handle_common_load(m);
            switch (m.kind) {
                case MsgKind::SendLoadInfo: handle_load_info(m); break;
                case MsgKind::RequestWork: serve_work_request(m); break;
                case MsgKind::RequestOsc:
                    if (lv_.is_left_of(m.src, cfg_.rank)) {
                        Message ack = base_msg(MsgKind::OscAck);
                        bus_.send(cfg_.rank, m.src, ack);
                    } else {
                        wq_.push_back(m.src);
                    }
                    break;
                case MsgKind::TerminationToken: held_tokens_.push_back(m); break;
                case MsgKind::Halt: halt_self(); return true;
                case MsgKind::OscAck: lv_.remove(m.src); break;
                case MsgKind::ReplyWithoutWork:
                case MsgKind::ReplyInOsc: break;  // stale replies: loads already taken
                case MsgKind::ReplyWithWork:
                    throw ProtocolError("Reply_With_Work delivered to a running agent");
            }
            if (state_ == AgentState::Halted) return true;
        }
    }

    EngineEvent ev = engine_.run_until_event();
    switch (ev.kind) {
        case EventKind::PollPoint: return true;
        case EventKind::Solution: on_solution(std::move(ev.text)); return true;
        case EventKind::SideEffect: on_side_effect(std::move(ev.text)); return true;
        case EventKind::ScheduleHit:
        case EventKind::Exhausted: enter_scheduling(); return true;
    }
    return true;
}

void Agent::on_solution(std::string answer) {
    sinks_.solution(cfg_.rank, std::move(answer));
    if (cfg_.first_solution) {
        broadcast_halt();
        halt_self();
    }
}

void Agent::on_side_effect(std::string text) {
    if (!cfg_.osc) {
        sinks_.effect(cfg_.rank, text);
        return;
    }
    pending_effect_ = std::move(text);
    if (!lv_.contains(cfg_.rank)) {
        // conservative recovery: assume rightmost and wait for everyone known
        lv_.place_after(lv_.order().empty() ? cfg_.rank : lv_.order().back(), cfg_.rank);
    }
    if (lv_.leftmost_is(cfg_.rank)) {
        perform_pending_effect();
        return;
    }
    state_ = AgentState::OrderSensitive;
    for (uint32_t left : lv_.left_of(cfg_.rank)) {
        Message req = base_msg(MsgKind::RequestOsc);
        bus_.send(cfg_.rank, left, req);
    }
}

void Agent::perform_pending_effect() {
    sinks_.effect(cfg_.rank, pending_effect_);
    pending_effect_.clear();
    ++stats_.oscs_performed;
    state_ = AgentState::Running;
    send_load_refresh();
}

void Agent::send_load_refresh() {
    Message info = base_msg(MsgKind::SendLoadInfo);
    info.giver = info.receiver = cfg_.rank;
    info.giver_load = info.receiver_load = engine_.parallel_load();
    info.src_load = info.giver_load;
    if (cfg_.policy == VictimPolicy::Centralized)
        bus_.send(cfg_.rank, 0, info);
    else
        bus_.broadcast(cfg_.rank, info);
}

void Agent::serve_work_request(const Message& m) {
    uint32_t load = engine_.parallel_load();
    if (load > cfg_.threshold) {
        engine_.label_parallel_choicepoints();
        std::optional<Label> common;
        if (cfg_.incremental)
            common = find_common_frontier(engine_.labels().labels(), m.labels);
        SharePayload payload = build_share_payload(engine_, common, cfg_.strategy, cfg_.ratio,
                                                   cfg_.policy == VictimPolicy::TopMost);
        apply_giver_split(engine_, payload);
        uint32_t receiver_load = 0;
        for (const SplitAssignment& a : payload.assignment)
            if (!a.given.empty()) ++receiver_load;
        if (payload.incremental)
            ++stats_.sharings_given_incremental;
        else
            ++stats_.sharings_given_full;
        token_.on_work_sent();

        Message reply;
        reply.kind = MsgKind::ReplyWithWork;
        reply.src = cfg_.rank;
        reply.src_load = payload.load_after;
        reply.payload = std::make_shared<SharePayload>(std::move(payload));
        bus_.send(cfg_.rank, m.src, reply);

        loads_.set(cfg_.rank, reply.src_load);
        loads_.set(m.src, receiver_load);
        if (cfg_.osc) {
            lv_.place_after(cfg_.rank, m.src);
            dedup_.record(cfg_.rank, m.src, cfg_.rank);
        }
        Message info;
        info.kind = MsgKind::SendLoadInfo;
        info.src = cfg_.rank;
        info.src_load = reply.src_load;
        info.giver = cfg_.rank;
        info.receiver = m.src;
        info.giver_load = reply.src_load;
        info.receiver_load = receiver_load;
        if (cfg_.policy == VictimPolicy::Centralized)
            bus_.send(cfg_.rank, 0, info);
        else
            bus_.broadcast(cfg_.rank, info);

        ++participations_;
        if (cfg_.gc_invalidation_period && *cfg_.gc_invalidation_period != 0 &&
            participations_ % *cfg_.gc_invalidation_period == 0)
            engine_.invalidate_labels();
    } else {
        Message reply = base_msg(MsgKind::ReplyWithoutWork);
        reply.src_load = load;
        bus_.send(cfg_.rank, m.src, reply);
        loads_.set(m.src, 0);
        if (cfg_.osc) lv_.remove(m.src);
        if (cfg_.policy == VictimPolicy::Centralized) send_load_refresh();
    }
}

// ---------------------------------------------------------------------------
// scheduling state

void Agent::enter_scheduling() {
    state_ = AgentState::Scheduling;
    awaiting_.reset();
    defer_count_ = 0;
    loads_.set(cfg_.rank, 0);
    while (!wq_.empty()) {
        Message ack = base_msg(MsgKind::OscAck);
        bus_.send(cfg_.rank, wq_.front(), ack);
        wq_.pop_front();
    }
    release_held_tokens();
}

void Agent::got_work(const Message& m) {
    token_.on_work_received();
    install_payload(engine_, *m.payload);
    ++stats_.sharings_received;
    loads_.set(m.src, m.payload->load_after);
    uint32_t own = engine_.parallel_load();
    loads_.set(cfg_.rank, own);
    if (cfg_.osc) {
        lv_.place_after(m.src, cfg_.rank);
        dedup_.record(m.src, cfg_.rank, cfg_.rank);
        Message info;
        info.kind = MsgKind::SendLoadInfo;
        info.src = cfg_.rank;
        info.src_load = own;
        info.giver = m.src;
        info.receiver = cfg_.rank;
        info.giver_load = m.payload->load_after;
        info.receiver_load = own;
        bus_.broadcast(cfg_.rank, info);
    }
    awaiting_.reset();
    state_ = AgentState::Running;
    ++participations_;
    if (cfg_.gc_invalidation_period && *cfg_.gc_invalidation_period != 0 &&
        participations_ % *cfg_.gc_invalidation_period == 0)
        engine_.invalidate_labels();
}

bool Agent::step_scheduling() {
    if (is_central()) return step_central();
    for (const Message& m : bus_.poll(cfg_.rank, MsgKind::SendLoadInfo)) handle_load_info(m);
    for (const Message& m : bus_.poll(cfg_.rank)) {
        handle_common_load(m);
        switch (m.kind) {
            case MsgKind::SendLoadInfo: handle_load_info(m); break;
            case MsgKind::RequestWork: {
                Message reply = base_msg(MsgKind::ReplyWithoutWork);
                reply.src_load = 0;
                bus_.send(cfg_.rank, m.src, reply);
                loads_.set(m.src, 0);
                if (cfg_.osc) lv_.remove(m.src);
                break;
            }
            case MsgKind::RequestOsc: {
                Message ack = base_msg(MsgKind::OscAck);
                bus_.send(cfg_.rank, m.src, ack);
                break;
            }
            case MsgKind::ReplyWithoutWork:
                if (awaiting_ && (*awaiting_ == m.src ||
                                  cfg_.policy == VictimPolicy::Centralized))
                    awaiting_.reset();
                break;
            case MsgKind::ReplyInOsc:
                loads_.set(m.src, 1);
                if (awaiting_ && *awaiting_ == m.src) awaiting_.reset();
                break;
            case MsgKind::ReplyWithWork: got_work(m); break;
            case MsgKind::TerminationToken: process_token(m); break;
            case MsgKind::Halt: halt_self(); break;
            case MsgKind::OscAck: lv_.remove(m.src); break;
        }
        if (state_ != AgentState::Scheduling) return true;
    }

    if (awaiting_) return false;
    if (token_.round_active()) {
        // dead-end wait for the verdict; the delay-termination variant leaves
        // as soon as the load vector shows work somewhere
        if (!(cfg_.delay_termination && loads_.any_other_positive())) return false;
    }

    VictimChoice choice = select_victim(loads_, cfg_.policy, cfg_.threshold, prev_victim_);
    if (std::holds_alternative<AllIdle>(choice)) {
        if (!token_.round_active()) {
            if (cfg_.agents == 1) {
                halt_self();
                return true;
            }
            Message tok = token_.initiate();
            bus_.send(cfg_.rank, (cfg_.rank + 1) % cfg_.agents, tok);
        }
        return false;
    }
    uint32_t victim;
    if (std::holds_alternative<Defer>(choice)) {
        if (++defer_count_ <= cfg_.defer_limit) return false;
        // deferred long enough: ask the busiest positive entry anyway
        uint32_t best = cfg_.agents, best_load = 0;
        for (uint32_t r = 0; r < cfg_.agents; ++r) {
            if (r == cfg_.rank) continue;
            if (loads_.get(r) > best_load) {
                best = r;
                best_load = loads_.get(r);
            }
        }
        if (best == cfg_.agents) return false;
        victim = best;
    } else {
        victim = std::get<Victim>(choice).rank;
    }
    defer_count_ = 0;
    Message req = base_msg(MsgKind::RequestWork);
    req.src_load = 0;
    req.labels = engine_.labels().labels();
    bus_.send(cfg_.rank, victim, req);
    awaiting_ = victim;
    prev_victim_ = victim;
    return true;
}

// ---------------------------------------------------------------------------
// order-sensitive state

bool Agent::step_order_sensitive() {
    for (const Message& m : bus_.poll(cfg_.rank, MsgKind::SendLoadInfo)) handle_load_info(m);
    for (const Message& m : bus_.poll(cfg_.rank)) {
        handle_common_load(m);
        switch (m.kind) {
            case MsgKind::SendLoadInfo: handle_load_info(m); break;
            case MsgKind::RequestOsc:
                if (lv_.is_left_of(m.src, cfg_.rank)) {
                    Message ack = base_msg(MsgKind::OscAck);
                    bus_.send(cfg_.rank, m.src, ack);
                } else {
                    wq_.push_back(m.src);
                }
                break;
            case MsgKind::OscAck: lv_.remove(m.src); break;
            case MsgKind::RequestWork: {
                lv_.remove(m.src);
                Message reply = base_msg(MsgKind::ReplyInOsc);
                bus_.send(cfg_.rank, m.src, reply);
                loads_.set(m.src, 0);
                break;
            }
            case MsgKind::TerminationToken: held_tokens_.push_back(m); break;
            case MsgKind::Halt: halt_self(); return true;
            case MsgKind::ReplyWithoutWork:
            case MsgKind::ReplyInOsc: break;
            case MsgKind::ReplyWithWork:
                throw ProtocolError("Reply_With_Work delivered in the order-sensitive state");
        }
        if (state_ == AgentState::Halted) return true;
    }
    if (lv_.leftmost_is(cfg_.rank)) {
        perform_pending_effect();
        return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// central agent (centralized policy, rank 0)

bool Agent::step_central() {
    bool acted = false;
    for (const Message& m : bus_.poll(cfg_.rank)) {
        acted = true;
        handle_common_load(m);
        switch (m.kind) {
            case MsgKind::RequestWork:
                central_idle_.insert(m.src);
                loads_.set(m.src, 0);
                // a re-request clears any pairing that was heading its way
                for (auto it = central_pairings_.begin(); it != central_pairings_.end();) {
                    if (it->second == m.src)
                        it = central_pairings_.erase(it);
                    else
                        ++it;
                }
                central_queue_.push_back({m});
                break;
            case MsgKind::SendLoadInfo:
                loads_.set(m.giver, m.giver_load);
                loads_.set(m.receiver, m.receiver_load);
                if (m.giver != m.receiver) {
                    central_pairings_.erase({m.giver, m.receiver});
                    central_idle_.erase(m.receiver);
                }
                break;
            case MsgKind::Halt: halt_self(); return true;
            default: break;
        }
    }
    central_try_match();
    central_check_termination();
    return acted;
}

void Agent::central_try_match() {
    for (auto it = central_queue_.begin(); it != central_queue_.end();) {
        uint32_t requester = it->original.src;
        uint32_t best = cfg_.agents, best_load = 0;
        for (uint32_t r = 1; r < cfg_.agents; ++r) {
            if (r == requester) continue;
            bool busy_pairing = false;
            for (const auto& p : central_pairings_)
                if (p.first == r) busy_pairing = true;
            if (busy_pairing) continue;
            if (loads_.get(r) > best_load) {
                best = r;
                best_load = loads_.get(r);
            }
        }
        if (best == cfg_.agents || best_load <= cfg_.threshold) {
            ++it;  // queue until load rises
            continue;
        }
        // forward the original request (labels intact) to the chosen giver
        bus_.send(cfg_.rank, best, it->original);
        central_pairings_.insert({best, requester});
        central_idle_.erase(requester);
        it = central_queue_.erase(it);
    }
}

void Agent::central_check_termination() {
    if (!central_pairings_.empty()) return;
    for (uint32_t r = 1; r < cfg_.agents; ++r) {
        if (loads_.get(r) != 0) return;
        if (central_idle_.count(r) == 0) return;
    }
    broadcast_halt();
    halt_self();
}

}  // namespace orsplit
