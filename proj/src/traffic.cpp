#include "ftn/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftn::traffic {

namespace {

// Natural log of the pmf, or -inf when the probability is zero.
double log_pmf(double lambda, double t, std::int64_t n) {
    if (!(lambda >= 0.0)) throw std::domain_error("lambda must be >= 0");
    if (!(t >= 0.0)) throw std::domain_error("t must be >= 0");
    if (n < 0) throw std::domain_error("n must be >= 0");

    const double mean = lambda * t;
    if (mean == 0.0)
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return static_cast<double>(n) * std::log(mean) - mean -
           std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace

double poisson_pmf(double lambda, double t, std::int64_t n) {
    return std::exp(log_pmf(lambda, t, n));
}

double poisson_log10_pmf(double lambda, double t, std::int64_t n) {
    return log_pmf(lambda, t, n) / std::log(10.0);
}

double network_distribution(double lambda, double t, std::int64_t n,
                            std::int64_t devices) {
    if (devices < 1) throw std::domain_error("device count must be >= 1");
    return static_cast<double>(devices) * poisson_pmf(lambda, t, n);
}

double loss_single(double rate, double fault_duration) {
    if (!(rate >= 0.0)) throw std::domain_error("rate must be >= 0");
    if (!(fault_duration >= 0.0)) throw std::domain_error("duration must be >= 0");
    return rate * fault_duration;
}

double loss_multi(double rate, double fault_duration, std::int64_t faulty_devices) {
    if (faulty_devices < 0) throw std::domain_error("device count must be >= 0");
    return loss_single(rate, fault_duration) * static_cast<double>(faulty_devices);
}

double loss_schedule(double rate, std::span<const FaultInterval> schedule) {
    std::vector<FaultInterval> sorted(schedule.begin(), schedule.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const FaultInterval& a, const FaultInterval& b) {
                  return a.start_ms < b.start_ms;
              });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].end_ms <= sorted[i].start_ms)
            throw std::invalid_argument("interval " + std::to_string(i) +
                                        ": end must exceed start");
        if (sorted[i].devices_faulty < 0)
            throw std::invalid_argument("interval " + std::to_string(i) +
                                        ": negative device count");
        if (i > 0 && sorted[i].start_ms < sorted[i - 1].end_ms)
            throw std::invalid_argument("fault intervals overlap");
    }
    double total = 0.0;
    for (const auto& iv : sorted)
        total += loss_multi(rate, static_cast<double>(iv.end_ms - iv.start_ms),
                            iv.devices_faulty);
    return total;
}

std::uint64_t buffer_size_bits(double safety_factor, double expected_loss,
                               double packet_size_bits) {
    if (!(safety_factor >= 0.0)) throw std::domain_error("Y must be >= 0");
    if (!(expected_loss >= 0.0)) throw std::domain_error("L must be >= 0");
    if (!(packet_size_bits >= 0.0)) throw std::domain_error("packet size must be >= 0");
    const double b = safety_factor * expected_loss * packet_size_bits;
    if (!std::isfinite(b) ||
        b > static_cast<double>(std::numeric_limits<std::uint64_t>::max()))
        throw std::domain_error("buffer size overflows");
    return static_cast<std::uint64_t>(std::ceil(b));
}

}  // namespace ftn::traffic
