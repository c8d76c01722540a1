#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace orsplit {

/// Globally unique choice-point identity: (creating agent, per-agent serial).
/// Copies of a choice-point on other agents keep the original id.
struct CreationId {
    uint32_t rank = 0;
    uint64_t serial = 0;
    auto operator<=>(const CreationId&) const = default;
};

/// Identifies a shared parallel choice-point across agents. cp_index is the
/// ordinal of the choice-point within the owner's parallel-choice-point
/// sequence at labeling time; it stands in for the stack address the original
/// scheme used, since agents here do not share an address space.
struct Label {
    uint32_t rank = 0;
    uint64_t counter = 0;
    uint32_t cp_index = 0;
    auto operator<=>(const Label&) const = default;
};

/// Label stack entry: the wire-visible label plus the local choice-point it
/// names (not transmitted; used to locate the common frontier on this stack).
struct LabelEntry {
    Label label;
    CreationId cp;
};

struct LabelStack {
    std::vector<LabelEntry> entries;  // index 0 = oldest
    uint64_t counter = 1;             // next labeling epoch

    std::vector<Label> labels() const {
        std::vector<Label> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.label);
        return out;
    }
};

/// Deepest label of the longest common prefix of two label stacks (both
/// ordered oldest-first), or nullopt when the stacks share no prefix.
/// Above the returned choice-point the two agents' trees are identical.
std::optional<Label> find_common_frontier(const std::vector<Label>& giver,
                                          const std::vector<Label>& receiver);

}  // namespace orsplit
