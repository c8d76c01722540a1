#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "orsplit/label.hpp"
#include "orsplit/splitting.hpp"

namespace orsplit {

enum class MsgKind : uint8_t {
    RequestWork,
    ReplyWithWork,
    ReplyWithoutWork,
    SendLoadInfo,
    RequestOsc,
    OscAck,
    ReplyInOsc,
    TerminationToken,
    Halt,
};

constexpr const char* msg_kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::RequestWork: return "Request_Work";
        case MsgKind::ReplyWithWork: return "Reply_With_Work";
        case MsgKind::ReplyWithoutWork: return "Reply_Without_Work";
        case MsgKind::SendLoadInfo: return "Send_LoadInfo";
        case MsgKind::RequestOsc: return "Request_OSC";
        case MsgKind::OscAck: return "OSC_Acknowledgment";
        case MsgKind::ReplyInOsc: return "Reply_In_OSC";
        case MsgKind::TerminationToken: return "Termination_Token";
        case MsgKind::Halt: return "Halt";
    }
    return "?";
}
constexpr size_t kMsgKindCount = 9;

/// The closed protocol message set. Every message carries the sender's
/// current load estimate. Send_LoadInfo announces a sharing event
/// giver->receiver with both post-split loads; giver == receiver encodes a
/// plain load refresh that never touches linear vectors.
struct Message {
    MsgKind kind = MsgKind::Halt;
    uint32_t src = 0;
    uint32_t src_load = 0;

    std::vector<Label> labels;  // RequestWork: requester's label stack

    std::shared_ptr<SharePayload> payload;  // ReplyWithWork

    uint32_t giver = 0;  // SendLoadInfo
    uint32_t receiver = 0;
    uint32_t giver_load = 0;
    uint32_t receiver_load = 0;

    uint8_t token_color = 0;  // TerminationToken: 0 white, 1 black
    uint32_t token_initiator = 0;
    int64_t token_deficit = 0;  // in-flight work-message balance picked up so far

    std::vector<uint8_t> encode() const;
    static Message decode(std::span<const uint8_t> bytes);
};

}  // namespace orsplit
