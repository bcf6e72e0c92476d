#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "ftn/topology.hpp"
#include "ftn/wire.hpp"

namespace ftn::protocol {

using Millis = std::int64_t;

enum class ProtocolKind { Ftn, Conventional };

struct FtnParams {
    Millis qm_period_ms = 500;        // t_p
    Millis buffer_timeout_ms = 1000;  // t_o
    std::int64_t buffer_capacity_bits = 1'000'000;  // B
};

struct SenderParams {
    Millis retransmit_timeout_ms = 1200;  // conventional 2 x end-to-end latency
};

// A frame as the simulator moves it around: the wire header fields plus an
// abstract size in bits (the experiments use 500-bit frames, below one
// whole payload byte per bit, so size is carried separately from payload).
struct Frame {
    wire::MessageKind kind = wire::MessageKind::Data;
    wire::Address sender;
    wire::Address destination;
    std::int64_t size_bits = 72;  // 9-byte header minimum
    std::uint64_t id = 0;
    bool is_ack = false;  // acknowledgements are Data frames flowing back
};

struct BufferEntry {
    std::uint64_t entry_id = 0;
    Frame frame;
    Millis stored_at = 0;
    Millis deadline = 0;  // stored_at + t_o
    topo::NodeId faulty_next_hop = topo::kNoNode;
};

// Transition outputs. Transitions perform no I/O; the engine interprets
// these, schedules deliveries and writes the trace.
struct SendAction {
    Frame frame;
    int interface = 0;
    topo::NodeId neighbor = topo::kNoNode;
};
struct StoreAction {
    std::uint64_t entry_id = 0;
    std::uint64_t msg_id = 0;
    topo::NodeId faulty = topo::kNoNode;
    Millis deadline = 0;
};
struct ReleaseAction {
    std::vector<std::uint64_t> msg_ids;
    topo::NodeId neighbor = topo::kNoNode;
};
struct TimeoutAction {  // buffer-clear timeout fired; a NACK send follows
    std::uint64_t entry_id = 0;
    std::uint64_t msg_id = 0;
};
struct NackOriginated {
    std::uint64_t msg_id = 0;
    wire::Address original_sender;
};
struct DropAction {
    enum class Reason { NoRoute, InactiveRoute };
    std::uint64_t msg_id = 0;
    Reason reason = Reason::NoRoute;
};
struct MarkActiveAction { topo::NodeId neighbor = topo::kNoNode; };
struct MarkInactiveAction { topo::NodeId neighbor = topo::kNoNode; };
struct ScheduleProbeAction {
    topo::NodeId neighbor = topo::kNoNode;
    Millis at = 0;
};

using Action = std::variant<SendAction, StoreAction, ReleaseAction, TimeoutAction,
                            NackOriginated, DropAction, MarkActiveAction,
                            MarkInactiveAction, ScheduleProbeAction>;

// Per-router protocol state: routing table, bounded recovery buffer,
// detection bookkeeping and probe schedules. Deterministic: identical
// (state, input, now) always yields identical (state, actions). Owned by
// a single engine loop; no internal locking.
class RouterState {
public:
    RouterState(const topo::Topology& t, topo::NodeId self, FtnParams params,
                ProtocolKind protocol);

    topo::NodeId self() const { return self_; }
    const topo::RoutingTable& table() const { return table_; }
    std::int64_t remaining_capacity_bits() const { return remaining_bits_; }
    std::size_t buffered_count() const { return buffer_.size(); }
    const std::vector<BufferEntry>& buffer() const { return buffer_; }
    bool probing(topo::NodeId neighbor) const;

    // Periodic detection round: declare neighbors faulty whose report is a
    // full period overdue, then query every directly connected neighbor
    // still believed up.
    std::vector<Action> on_detection_tick(Millis now);

    // Dispatch for a decoded frame arriving from a direct neighbor.
    std::vector<Action> handle_frame(const Frame& f, topo::NodeId from, Millis now);

    // Locally originated frame (group server traffic, NACKs, released
    // retransmissions) entering the forwarding path.
    std::vector<Action> originate(const Frame& f, Millis now);

    // Fault recovery, step 1-2: buffer the frame for a faulty next hop when
    // it fits, otherwise NACK the sender immediately.
    std::vector<Action> store_on_fault(const Frame& f, topo::NodeId faulty, Millis now);

    // Recovery probe loop: one query per period while the neighbor stays
    // inactive. Returns the follow-up probe time via ScheduleProbeAction.
    std::vector<Action> on_probe_tick(topo::NodeId neighbor, Millis now);

    // Buffer-clear timeout. Stale timers (entry already released) no-op.
    std::vector<Action> on_buffer_timeout(std::uint64_t entry_id, Millis now);

    // Entries whose deadline has already passed (deferred while the node
    // itself was down).
    std::vector<std::uint64_t> expired_entries(Millis now) const;

    // Engine-driven status flip at fault injection/repair. Returns false
    // when the entry was already in the requested state or the node is not
    // a direct neighbor.
    bool force_status(topo::NodeId neighbor, topo::ConnectionStatus s);

    // Forgets outstanding query deadlines; called when this device itself
    // comes back from a fault so stale silence is not misread.
    void reset_detection();

private:
    std::vector<Action> forward(const Frame& f, int arrival_interface, Millis now);
    void neighbor_alive(topo::NodeId neighbor, Millis now, std::vector<Action>& out);
    void send_nack_for(const Frame& original, Millis now, std::vector<Action>& out);
    void check_capacity_invariant() const;

    const topo::Topology* topo_;
    topo::NodeId self_;
    FtnParams params_;
    ProtocolKind protocol_;
    topo::RoutingTable table_;
    std::int64_t remaining_bits_;
    std::vector<BufferEntry> buffer_;  // FIFO in stored order

    struct NeighborWatch {
        std::optional<Millis> awaiting_reply_since;
        bool probing = false;
    };
    std::map<topo::NodeId, NeighborWatch> watch_;
    std::uint64_t next_entry_id_ = 1;
};

// Sender-side bookkeeping for one traffic endpoint: the original frames
// are kept so NACKs and timeouts can retransmit them.
class SenderState {
public:
    explicit SenderState(ProtocolKind protocol, SenderParams params)
        : protocol_(protocol), params_(params) {}

    // Registers a transmission (first or repeat) of `f`.
    void on_send(const Frame& f, Millis now);

    void on_ack(std::uint64_t id, Millis now);
    bool acked(std::uint64_t id) const;

    // FTN: a NACK triggers one immediate retransmission. Duplicate NACKs
    // (same reporting device, no retransmission in between), NACKs for
    // acknowledged messages and uncorrelated NACKs return nullopt.
    std::optional<Frame> on_nack(std::uint64_t id, const wire::Address& reporter,
                                 Millis now);

    // Conventional: retransmit when the timeout elapsed without an ACK.
    // Returns the frame to resend; the next check belongs at now + rto.
    std::optional<Frame> on_retransmit_check(std::uint64_t id, Millis now);

    std::optional<Millis> first_sent(std::uint64_t id) const;
    std::optional<Millis> ack_time(std::uint64_t id) const;
    int retransmissions(std::uint64_t id) const;

private:
    struct Outstanding {
        Frame frame;
        Millis first_sent = 0;
        Millis last_sent = 0;
        std::optional<Millis> acked_at;
        std::optional<wire::Address> last_nack_from;  // cleared on retransmit
        int retransmissions = 0;
    };
    ProtocolKind protocol_;
    SenderParams params_;
    std::map<std::uint64_t, Outstanding> msgs_;
};

}  // namespace ftn::protocol
