#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ftn/protocol.hpp"
#include "ftn/topology.hpp"

namespace ftn::engine {

using protocol::Millis;

struct TrafficSpec {
    std::string sender;       // node name; hosts and routing devices may send
    std::string destination;  // node name, or a dotted address (broadcast/multicast)
    std::int64_t frame_bits = 500;
    double frame_rate_fps = 0;  // required when count > 1
    Millis start_ms = 0;
    std::int64_t count = 1;
};

struct FaultSpec {
    enum class Kind { Node, Link };
    Kind kind = Kind::Node;
    std::string node;            // Kind::Node
    std::string link_a, link_b;  // Kind::Link
    Millis start_ms = 0;
    Millis duration_ms = 0;

    std::string label() const;
};

struct Scenario {
    topo::Topology topology;  // routing tables already derived
    protocol::ProtocolKind protocol = protocol::ProtocolKind::Ftn;
    protocol::FtnParams ftn;
    protocol::SenderParams sender;
    bool ack_enabled = true;
    Millis horizon_ms = 120'000;
    std::vector<TrafficSpec> traffic;
    std::vector<FaultSpec> faults;
};

struct TraceRecord {
    Millis time_ms = 0;
    std::string node;
    std::string event;
    std::uint64_t msg_id = 0;  // 0 = not message-related
    std::string detail;
};

struct MessageOutcome {
    std::uint64_t id = 0;
    std::string sender;
    std::string destination;
    Millis injected_ms = 0;
    std::string terminal;     // delivered | nacked | lost
    Millis delivered_ms = -1;
    Millis latency_ms = -1;   // ACK received minus first transmission
    int retransmissions = 0;
    int nacks = 0;
};

struct RunStats {
    std::vector<MessageOutcome> messages;
    std::int64_t injected = 0;
    std::int64_t delivered = 0;
    std::int64_t nacked = 0;
    std::int64_t lost = 0;
    double mean_latency_ms = 0;
    Millis max_latency_ms = 0;
    double throughput_bps = 0;
    Millis end_time_ms = 0;
    bool truncated = false;

    // Observability for the analytic cross-checks.
    Millis last_buffer_deadline_ms = -1;  // FTN timeout column
    Millis last_retransmit_ms = -1;       // conventional timeout column
    std::int64_t min_remaining_buffer_bits = std::numeric_limits<std::int64_t>::max();
    bool fdrm_reply_violation = false;    // a report triggered an FDM send
};

struct RunResult {
    std::vector<TraceRecord> trace;
    RunStats stats;
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> issues);
    const std::vector<std::string>& issues() const { return issues_; }

private:
    std::vector<std::string> issues_;
};

// All scenario violations at once; empty means runnable.
std::vector<std::string> validate(const Scenario& sc);

// Deterministic discrete-event run: integer-millisecond clock, events
// ordered by (time, kind priority, scheduling sequence). Throws
// ValidationError when the scenario is invalid.
RunResult run(const Scenario& sc);

// Columns: time_ms,node,event,msg_id,detail. Byte-stable across runs.
std::string trace_to_csv(std::span<const TraceRecord> trace);

}  // namespace ftn::engine
