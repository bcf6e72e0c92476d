#pragma once

namespace ftn::metrics {

struct Case1Row {
    double frame_rate = 0;
    double qd_s = 0;
    double td_s = 0;
    double pd_s = 0;
    double delay_s = 0;
    double latency_s = 0;
    double efficiency = 0;
};

// Fault-free delay/latency/efficiency model over a 6-hop path. Piecewise,
// following the published table cell by cell: propagation counts only up to
// 1000 fps, transmission only from 2000 fps, queueing only from 3000 fps.
// Efficiency is transmission time (or propagation when transmission is
// zero) over latency. Throws std::domain_error for non-positive rates.
Case1Row case1_row(double frame_rate, double frame_bits = 500,
                   double capacity_bps = 1e6, int hops = 6,
                   double pd_per_hop_s = 0.05);

// Timeout for clearing a buffered message: twice the end-to-end latency.
// Throws std::domain_error when latency <= 0.
double buffer_clear_timeout(double latency_s);

// Normalized goodput: rises linearly to 1.0 at the saturating frame rate,
// then falls as overload losses grow (the 2 - r branch).
double throughput_curve(double frame_rate, double frame_bits = 500,
                        double capacity_bps = 1e6);

struct Table6Row {
    double timeout_s = 0;
    double latency_s = 0;
};

// Buffering-router prediction for a router down `fault_s` seconds starting
// with the transmission: the k-th buffer deadline falls at
// arrival_offset + t_o + k * cycle; delivery completes post_recovery after
// the repair. Valid outside the clear/retransmit gap windows; the engine is
// authoritative inside them.
Table6Row ftn_closed_form(double fault_s, double t_o_s = 1.0,
                          double arrival_offset_s = 0.05, double cycle_s = 1.1,
                          double post_recovery_s = 0.6);

// Source-retransmission baseline: n-th retry at n * rto, success once the
// fault has cleared; latency adds one healthy round trip.
Table6Row conventional_closed_form(double fault_s, double rto_s = 1.2,
                                   double rtt_healthy_s = 0.6);

}  // namespace ftn::metrics
