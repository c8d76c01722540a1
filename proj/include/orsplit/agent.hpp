#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "orsplit/engine.hpp"
#include "orsplit/osc.hpp"
#include "orsplit/scheduler.hpp"
#include "orsplit/splitting.hpp"
#include "orsplit/transport.hpp"

namespace orsplit {

enum class AgentState : uint8_t { Running, Scheduling, OrderSensitive, Halted };

struct AgentConfig {
    uint32_t rank = 0;
    uint32_t agents = 1;
    VictimPolicy policy = VictimPolicy::BottomMost;
    SplitStrategy strategy = SplitStrategy::VerticalAlternate;
    double ratio = 0.5;
    uint32_t threshold = 2;
    uint64_t poll_frequency = 200;  // work-request handling cadence, in call reductions
    bool osc = false;
    bool incremental = false;
    bool first_solution = false;
    bool delay_termination = false;
    std::optional<uint32_t> gc_invalidation_period;
    uint32_t load_propagation = 0;  // 0: only at sharing events; N: refresh every N polls
    uint32_t defer_limit = 4;
};

/// Where solutions and side-effect output land. One instance per run,
/// shared by all agents; the runtime provides lockstep and thread-safe
/// implementations.
class RunSinks {
public:
    virtual ~RunSinks() = default;
    virtual void solution(uint32_t rank, std::string answer) = 0;
    virtual void effect(uint32_t rank, const std::string& text) = 0;
};

/// One or-parallel agent: an engine plus the distributed scheduling,
/// splitting and order-sensitive-computation protocol around it. step() is
/// one quantum of the agent's loop and is driven either round-robin by the
/// lockstep driver or by a dedicated thread.
class Agent {
public:
    struct Stats {
        uint64_t sharings_given_full = 0;
        uint64_t sharings_given_incremental = 0;
        uint64_t sharings_received = 0;
        uint64_t oscs_performed = 0;
        uint64_t token_rounds = 0;
    };

    Agent(const AgentConfig& cfg, std::shared_ptr<const Program> program, const Query& query,
          Bus& bus, RunSinks& sinks, ExecutionLedger* ledger);

    /// Marks this agent as the first running agent (it owns the query).
    void start_running();

    /// Returns false when there was nothing to do (idle hint for backoff).
    bool step();

    bool halted() const { return state_ == AgentState::Halted; }
    AgentState state() const { return state_; }
    Engine& engine() { return engine_; }
    const Stats& stats() const { return stats_; }
    const LinearVector& linear_vector() const { return lv_; }

private:
    AgentConfig cfg_;
    Engine engine_;
    Bus& bus_;
    RunSinks& sinks_;
    AgentState state_ = AgentState::Scheduling;

    LoadVector loads_;
    TokenState token_;
    std::vector<Message> held_tokens_;  // tokens received while busy

    LinearVector lv_;
    DedupMatrix dedup_;
    WaitingQueue wq_;
    std::string pending_effect_;

    std::optional<uint32_t> awaiting_;  // victim whose reply we wait for
    std::optional<uint32_t> prev_victim_;
    uint32_t defer_count_ = 0;
    uint64_t polls_ = 0;
    uint64_t participations_ = 0;  // sharing events, for the synthetic GC hook

    Stats stats_;

    // central-agent bookkeeping (rank 0 under the centralized policy)
    struct PendingRequest {
        Message original;
    };
    std::deque<PendingRequest> central_queue_;
    std::set<std::pair<uint32_t, uint32_t>> central_pairings_;  // (giver, receiver)
    std::set<uint32_t> central_idle_;

    bool is_central() const {
        return cfg_.policy == VictimPolicy::Centralized && cfg_.rank == 0;
    }
    uint32_t first_running_rank() const {
        return cfg_.policy == VictimPolicy::Centralized ? 1 : 0;
    }

    bool step_running();
    bool step_scheduling();
    bool step_order_sensitive();
    bool step_central();

    void handle_common_load(const Message& m);
    void handle_load_info(const Message& m);
    void serve_work_request(const Message& m);
    void enter_scheduling();
    void got_work(const Message& m);
    void process_token(const Message& m);
    void release_held_tokens();
    void halt_self();
    void broadcast_halt();
    void on_solution(std::string answer);
    void on_side_effect(std::string text);
    void perform_pending_effect();
    void send_load_refresh();
    void central_try_match();
    void central_check_termination();
    Message base_msg(MsgKind kind) const;
};

}  // namespace orsplit
