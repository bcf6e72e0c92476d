#pragma once

#include <cstdint>
#include <span>

namespace ftn::traffic {

// P[n arrivals in a window of length t at mean rate lambda], the Poisson
// pmf with mean lambda*t. Evaluated in log space so large means and counts
// neither overflow nor underflow. lambda and t use the same time unit
// (milliseconds throughout the calculator). Throws std::domain_error on
// negative lambda, t, or n.
double poisson_pmf(double lambda, double t, std::int64_t n);

// log10 of the pmf; -infinity when the probability is exactly zero.
double poisson_log10_pmf(double lambda, double t, std::int64_t n);

// Expected packet distribution over `devices` identical devices:
// devices * poisson_pmf(lambda, t, n). Throws when devices < 1.
double network_distribution(double lambda, double t, std::int64_t n,
                            std::int64_t devices);

// Expected loss at one device faulty for fault_duration: rate * duration.
double loss_single(double rate, double fault_duration);

// Expected loss with `faulty_devices` devices down simultaneously.
double loss_multi(double rate, double fault_duration, std::int64_t faulty_devices);

struct FaultInterval {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    std::int64_t devices_faulty = 0;
};

// Sum of rate * (end-start) * K over the schedule. Intervals must be
// well-formed and non-overlapping; throws std::invalid_argument otherwise.
double loss_schedule(double rate, std::span<const FaultInterval> schedule);

// B = Y * L * packet_size, rounded up to a whole number of bits.
std::uint64_t buffer_size_bits(double safety_factor, double expected_loss,
                               double packet_size_bits);

}  // namespace ftn::traffic
