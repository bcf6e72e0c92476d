#include "ftn/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ftn/metrics.hpp"
#include "ftn/traffic.hpp"

namespace ftn::report {

namespace {

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string seconds(engine::Millis ms) {
    return fmt(static_cast<double>(ms) / 1000.0, 3);
}

}  // namespace

engine::Scenario fault_free_scenario(double rate_fps, std::int64_t count) {
    engine::Scenario sc;
    sc.topology = topo::build_paper_topology();
    sc.protocol = protocol::ProtocolKind::Ftn;
    engine::TrafficSpec ts;
    ts.sender = "GS1";
    ts.destination = "SW5-1";
    ts.frame_bits = 500;
    ts.frame_rate_fps = rate_fps;
    ts.count = count;
    sc.traffic.push_back(ts);
    return sc;
}

engine::Scenario faulty_router_scenario(engine::Millis fault_ms,
                                        protocol::ProtocolKind protocol) {
    engine::Scenario sc;
    sc.topology = topo::build_paper_topology();
    sc.protocol = protocol;
    engine::TrafficSpec ts;
    ts.sender = "GS1";
    ts.destination = "SW5-2";
    ts.frame_bits = 500;
    ts.count = 1;
    sc.traffic.push_back(ts);
    engine::FaultSpec fs;
    fs.kind = engine::FaultSpec::Kind::Node;
    fs.node = "R3";
    fs.start_ms = 0;
    fs.duration_ms = fault_ms;
    sc.faults.push_back(fs);
    sc.horizon_ms = std::max<engine::Millis>(fault_ms * 4 + 10'000, 30'000);
    return sc;
}

MeasuredRow measure_faulty_run(engine::Millis fault_ms, protocol::ProtocolKind protocol) {
    auto result = engine::run(faulty_router_scenario(fault_ms, protocol));
    MeasuredRow row;
    if (!result.stats.messages.empty())
        row.latency_ms = result.stats.messages.front().latency_ms;
    row.timeout_ms = protocol == protocol::ProtocolKind::Ftn
                         ? result.stats.last_buffer_deadline_ms
                         : result.stats.last_retransmit_ms;
    return row;
}

std::string table4_csv() {
    std::ostringstream out;
    out << "frame_rate,qd_s,td_s,pd_s,delay_s,latency_s,efficiency,note\n";
    for (double rate : {100.0, 1000.0, 2000.0, 3000.0, 5000.0, 7500.0, 10000.0}) {
        auto row = metrics::case1_row(rate);
        out << fmt(rate, 0) << ',' << fmt(row.qd_s, 3) << ',' << fmt(row.td_s, 3) << ','
            << fmt(row.pd_s, 3) << ',' << fmt(row.delay_s, 3) << ','
            << fmt(row.latency_s, 3) << ',' << fmt(row.efficiency, 3) << ',';
        if (rate == 7500.0)
            out << "published row prints 7.0/14/0.26; formula gives these values";
        out << '\n';
    }
    return out.str();
}

std::string table5_csv() {
    std::ostringstream out;
    out << "frame_rate,data_rate_bps,throughput\n";
    for (double rate : {100.0, 500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0}) {
        out << fmt(rate, 0) << ',' << fmt(rate * 500.0, 0) << ','
            << fmt(metrics::throughput_curve(rate), 2) << '\n';
    }
    return out.str();
}

std::string table6_csv() {
    std::ostringstream out;
    out << "fault_s,conventional_timeout_s,conventional_latency_s,"
           "ftn_timeout_s,ftn_latency_s,note\n";
    for (engine::Millis fd : {500, 1000, 1500, 2000, 2500, 3000, 4000, 4500}) {
        auto conv = measure_faulty_run(fd, protocol::ProtocolKind::Conventional);
        auto ftn = measure_faulty_run(fd, protocol::ProtocolKind::Ftn);
        out << seconds(fd) << ',' << seconds(conv.timeout_ms) << ','
            << seconds(conv.latency_ms) << ',' << seconds(ftn.timeout_ms) << ','
            << seconds(ftn.latency_ms) << ',';
        if (fd == 4000)
            out << "published FTN latency prints 4.100; every other row is fault+0.600";
        out << '\n';
    }
    return out.str();
}

std::string fig4_csv() {
    std::ostringstream out;
    out << "frame_rate,delay_s,latency_s\n";
    for (double rate = 100; rate <= 10'000; rate += 100) {
        auto row = metrics::case1_row(rate);
        out << fmt(rate, 0) << ',' << fmt(row.delay_s, 3) << ',' << fmt(row.latency_s, 3)
            << '\n';
    }
    return out.str();
}

std::string fig6_csv() {
    std::ostringstream out;
    out << "frame_rate,throughput\n";
    for (double rate = 0; rate <= 4000; rate += 100)
        out << fmt(rate, 0) << ',' << fmt(metrics::throughput_curve(rate), 3) << '\n';
    return out.str();
}

std::string fig7_csv() {
    std::ostringstream out;
    out << "fault_s,conventional_latency_s,ftn_latency_s\n";
    for (engine::Millis fd = 500; fd <= 4500; fd += 500) {
        auto conv = measure_faulty_run(fd, protocol::ProtocolKind::Conventional);
        auto ftn = measure_faulty_run(fd, protocol::ProtocolKind::Ftn);
        out << seconds(fd) << ',' << seconds(conv.latency_ms) << ','
            << seconds(ftn.latency_ms) << '\n';
    }
    return out.str();
}

std::string buffer_report(double lambda, double t, std::int64_t n,
                          std::int64_t devices, const std::string& schedule,
                          double safety_y, double packet_bits) {
    std::ostringstream out;
    const double x = traffic::poisson_pmf(lambda, t, n);
    const double xlog = traffic::poisson_log10_pmf(lambda, t, n);
    const double d = traffic::network_distribution(lambda, t, n, devices);
    char line[160];
    std::snprintf(line, sizeof line, "X (single device)  = %.6g  (log10 = %.4f)\n", x, xlog);
    out << line;
    std::snprintf(line, sizeof line, "D (%lld devices)     = %.6g\n",
                  static_cast<long long>(devices), d);
    out << line;

    if (!schedule.empty()) {
        std::vector<traffic::FaultInterval> intervals;
        std::int64_t cursor = 0;
        std::istringstream parts(schedule);
        std::string part;
        while (std::getline(parts, part, ',')) {
            auto colon = part.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("schedule entry '" + part +
                                            "' is not duration:devices");
            traffic::FaultInterval iv;
            try {
                iv.start_ms = cursor;
                iv.end_ms = cursor + std::stoll(part.substr(0, colon));
                iv.devices_faulty = std::stoll(part.substr(colon + 1));
            } catch (const std::exception&) {
                throw std::invalid_argument("schedule entry '" + part +
                                            "' is not duration:devices");
            }
            cursor = iv.end_ms;
            intervals.push_back(iv);
        }
        std::int64_t device_ms = 0;
        for (const auto& iv : intervals) {
            const double l = traffic::loss_multi(x, static_cast<double>(iv.end_ms - iv.start_ms),
                                                 iv.devices_faulty);
            std::snprintf(line, sizeof line,
                          "  interval %lld..%lld ms, %lld faulty: L = %.6g\n",
                          static_cast<long long>(iv.start_ms),
                          static_cast<long long>(iv.end_ms),
                          static_cast<long long>(iv.devices_faulty), l);
            out << line;
            device_ms += (iv.end_ms - iv.start_ms) * iv.devices_faulty;
        }
        const double total = traffic::loss_schedule(x, intervals);
        std::snprintf(line, sizeof line,
                      "L (schedule total) = %.6g  (K*T = %lld device-ms)\n", total,
                      static_cast<long long>(device_ms));
        out << line;
        const auto b = traffic::buffer_size_bits(safety_y, total, packet_bits);
        std::snprintf(line, sizeof line, "B = Y * L * packet = %llu bits (Y=%g, packet=%g)\n",
                      static_cast<unsigned long long>(b), safety_y, packet_bits);
        out << line;
    }
    return out.str();
}

}  // namespace ftn::report
