#pragma once

#include <string>

#include "ftn/engine.hpp"

namespace ftn::report {

// The two benchmark set-ups on the built-in hierarchy, 50 ms hops, 1 Mbps
// links, 500-bit frames.

// Fault-free streaming: GS1 sends `count` frames at `rate_fps` to the
// 6-hop host SW5-1.
engine::Scenario fault_free_scenario(double rate_fps = 100, std::int64_t count = 5);

// Router R3 down from t=0 for `fault_ms`; one frame GS1 -> SW5-2 at t=0.
engine::Scenario faulty_router_scenario(engine::Millis fault_ms,
                                        protocol::ProtocolKind protocol);

// Measured sender latency (ACK at the source) and the protocol's reported
// timeout, straight from an engine run.
struct MeasuredRow {
    engine::Millis timeout_ms = -1;
    engine::Millis latency_ms = -1;
};
MeasuredRow measure_faulty_run(engine::Millis fault_ms, protocol::ProtocolKind protocol);

// CSV reproductions (header row included, stable output).
std::string table4_csv();  // delay/latency/efficiency vs frame rate
std::string table5_csv();  // throughput vs frame rate
std::string table6_csv();  // engine-measured latency comparison
std::string fig4_csv();    // delay & latency series
std::string fig6_csv();    // throughput series
std::string fig7_csv();    // engine-measured FTN vs conventional latency

// Buffer-size calculator report. `schedule` is "T:K,T:K,..." with
// consecutive intervals in milliseconds; empty means no loss schedule.
// Throws std::invalid_argument on a malformed schedule and
// std::domain_error on invalid numerics.
std::string buffer_report(double lambda, double t, std::int64_t n,
                          std::int64_t devices, const std::string& schedule,
                          double safety_y, double packet_bits);

}  // namespace ftn::report
