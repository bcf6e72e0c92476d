#include "ftn/metrics.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ftn::metrics {

Case1Row case1_row(double frame_rate, double frame_bits, double capacity_bps,
                   int hops, double pd_per_hop_s) {
    if (!(frame_rate > 0)) throw std::domain_error("frame rate must be > 0");

    Case1Row row;
    row.frame_rate = frame_rate;
    row.pd_s = frame_rate <= 1000 ? hops * pd_per_hop_s : 0.0;
    row.td_s = frame_rate >= 2000 ? frame_rate * frame_bits / capacity_bps : 0.0;
    row.qd_s = frame_rate >= 3000 ? 0.5 * frame_rate / 1000.0 : 0.0;
    row.delay_s = row.qd_s + row.td_s + row.pd_s;
    row.latency_s = 2.0 * row.delay_s;
    row.efficiency = (row.td_s > 0 ? row.td_s : row.pd_s) / row.latency_s;
    return row;
}

double buffer_clear_timeout(double latency_s) {
    if (!(latency_s > 0)) throw std::domain_error("latency must be > 0");
    return 2.0 * latency_s;
}

double throughput_curve(double frame_rate, double frame_bits, double capacity_bps) {
    if (frame_rate < 0) throw std::domain_error("frame rate must be >= 0");
    double r = frame_rate * frame_bits / capacity_bps;
    if (r <= 1.0) return r;
    return r >= 2.0 ? 0.0 : 2.0 - r;
}

Table6Row ftn_closed_form(double fault_s, double t_o_s, double arrival_offset_s,
                          double cycle_s, double post_recovery_s) {
    if (fault_s < 0) throw std::domain_error("fault duration must be >= 0");
    // Integer milliseconds to keep the grid exact.
    const std::int64_t fd = std::llround(fault_s * 1000);
    const std::int64_t first = std::llround((arrival_offset_s + t_o_s) * 1000);
    const std::int64_t cycle = std::llround(cycle_s * 1000);
    std::int64_t timeout = first;
    while (timeout < fd) timeout += cycle;
    Table6Row row;
    row.timeout_s = static_cast<double>(timeout) / 1000.0;
    row.latency_s = (static_cast<double>(fd) + post_recovery_s * 1000.0) / 1000.0;
    return row;
}

Table6Row conventional_closed_form(double fault_s, double rto_s, double rtt_healthy_s) {
    if (fault_s < 0) throw std::domain_error("fault duration must be >= 0");
    const std::int64_t fd = std::llround(fault_s * 1000);
    const std::int64_t rto = std::llround(rto_s * 1000);
    std::int64_t n = (fd + rto - 1) / rto;  // retries needed to outlast the fault
    if (n < 1) n = 1;
    Table6Row row;
    row.timeout_s = static_cast<double>(n * rto) / 1000.0;
    if (fd == 0)
        row.latency_s = rtt_healthy_s;  // first transmission already succeeds
    else
        row.latency_s = row.timeout_s + rtt_healthy_s;
    return row;
}

}  // namespace ftn::metrics
