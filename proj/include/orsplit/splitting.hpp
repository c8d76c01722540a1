#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "orsplit/engine.hpp"
#include "orsplit/wire.hpp"

namespace orsplit {

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SplitStrategy : uint8_t { Horizontal, VerticalAlternate, VerticalBlock };

/// One parallel choice-point's untried alternatives, for the pure partition
/// function. Input lists are ordered bottom-most (newest) first.
struct CpAlts {
    CreationId id;
    std::vector<uint32_t> alts;
};

struct SplitOutcome {
    std::vector<std::vector<uint32_t>> keep;  // giver side, aligned with input
    std::vector<std::vector<uint32_t>> give;  // receiver side
};

/// Partitions untried alternatives between giver and receiver.
///  - vertical_alternate: giver keeps the bottom-most, third bottom-most, ...
///    choice-points wholesale; the rest go to the receiver.
///  - vertical_block: giver keeps the bottom ceil(ratio*n) choice-points,
///    gives the top rest, so the receiver restarts to the giver's right.
///  - horizontal: each choice-point's alternatives are divided; the giver
///    keeps the left part, and for odd counts the larger share alternates
///    between the two sides across consecutive choice-points.
SplitOutcome split_alternatives(SplitStrategy strategy, const std::vector<CpAlts>& newest_first,
                                double ratio);

struct WireChoicePoint {
    CreationId id;
    bool parallel = false;
    uint64_t trail_mark = 0;
    uint64_t var_mark = 0;
    std::vector<uint32_t> goal_nodes;  // term-graph indices, outermost goal first
};

struct TrailInstallEntry {
    uint64_t index;       // absolute trail index on both parties
    uint64_t var;
    uint32_t value_node;  // term-graph index
};

struct RepairEntry {
    CreationId id;
    uint8_t next_clause;  // receiver-side NextClause for a common-region parallel cp
};

struct SplitAssignment {
    CreationId id;
    std::vector<uint32_t> kept;   // clause indices the giver retains
    std::vector<uint32_t> given;  // clause indices the receiver obtains
};

/// Everything one sharing operation moves from giver to receiver. In full
/// mode the segment covers the giver's whole stack and binding_installs is
/// empty; in incremental mode only the part below the common frontier
/// travels, plus value-trail entries for conditional variables created at or
/// above the frontier and bound below it.
struct SharePayload {
    bool incremental = false;
    Label common;
    uint64_t var_count = 0;
    uint64_t base_trail = 0;  // == common cp's trail mark (0 in full mode)
    uint64_t base_var = 0;
    TermGraph terms;
    std::vector<WireChoicePoint> cps;  // oldest-first, strictly newer than the frontier
    std::vector<Label> label_segment;  // labels of the parallel cps in `cps`, in order
    std::vector<RepairEntry> repairs;
    std::vector<SplitAssignment> assignment;  // every parallel cp with untried alternatives
    std::vector<TrailInstallEntry> binding_installs;  // conditional bindings
    std::vector<TrailInstallEntry> region_trail;      // bindings of below-frontier variables
    uint32_t load_after = 0;  // giver's load once its side of the split is applied

    std::vector<uint8_t> encode() const;
    static SharePayload decode(std::span<const uint8_t> bytes);
};

/// Builds the payload for one give-work interaction. Labeling must have run
/// this round. `common` comes from find_common_frontier over the requester's
/// advertised label stack; nullopt forces a full copy. With `top_most` set,
/// the receiver gets every alternative of the oldest parallel choice-point
/// with untried alternatives instead of a strategy split.
SharePayload build_share_payload(const Engine& giver, std::optional<Label> common,
                                 SplitStrategy strategy, double ratio, bool top_most = false);

/// Applies the giver's side of the split: kept alternatives stay, given ones
/// are cleared to trust_fail, and the schedule sentinel moves above the
/// giver's remaining work.
void apply_giver_split(Engine& giver, const SharePayload& payload);

/// Installs a payload on the receiver: backtracks to the common frontier
/// (or resets entirely), rebuilds the transferred segment, installs the
/// conditional bindings with value-trail entries, repairs next-clause
/// fields, applies the receiver's side of the split, places the schedule
/// sentinel, and leaves the engine about to backtrack into its new work.
void install_payload(Engine& receiver, const SharePayload& payload);

}  // namespace orsplit
