#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ftn/metrics.hpp"

using namespace ftn::metrics;

TEST_CASE("fault-free table rows") {
    struct Want {
        double rate, qd, td, pd, delay, latency, eff;
    };
    // The published seven rows; 7500 carries the formula values (the
    // printed row 7.0/14/0.26 does not follow its own columns).
    const Want rows[] = {
        {100, 0, 0, 0.3, 0.3, 0.6, 0.5},
        {1000, 0, 0, 0.3, 0.3, 0.6, 0.5},
        {2000, 0, 1.0, 0, 1.0, 2.0, 0.5},
        {3000, 1.5, 1.5, 0, 3.0, 6.0, 0.25},
        {5000, 2.5, 2.5, 0, 5.0, 10.0, 0.25},
        {7500, 3.75, 3.75, 0, 7.5, 15.0, 0.25},
        {10000, 5.0, 5.0, 0, 10.0, 20.0, 0.25},
    };
    for (const auto& w : rows) {
        auto row = case1_row(w.rate);
        CAPTURE(w.rate);
        CHECK(row.qd_s == doctest::Approx(w.qd).epsilon(1e-12));
        CHECK(row.td_s == doctest::Approx(w.td).epsilon(1e-12));
        CHECK(row.pd_s == doctest::Approx(w.pd).epsilon(1e-12));
        CHECK(row.delay_s == doctest::Approx(w.delay).epsilon(1e-12));
        CHECK(row.latency_s == doctest::Approx(w.latency).epsilon(1e-12));
        CHECK(row.efficiency == doctest::Approx(w.eff).epsilon(1e-12));
    }
    CHECK_THROWS_AS(case1_row(0), std::domain_error);
    CHECK_THROWS_AS(case1_row(-5), std::domain_error);
}

TEST_CASE("latency is twice delay across rates") {
    for (double rate = 100; rate <= 10'000; rate += 250) {
        auto row = case1_row(rate);
        CHECK(row.latency_s == doctest::Approx(2 * row.delay_s).epsilon(1e-12));
    }
}

TEST_CASE("buffer clear timeout") {
    CHECK(buffer_clear_timeout(0.6) == doctest::Approx(1.2));
    CHECK_THROWS_AS(buffer_clear_timeout(0), std::domain_error);
    // Doubles under latency doubling, and equals 4x delay through the chain.
    for (double d : {0.1, 0.3, 1.7}) {
        CHECK(buffer_clear_timeout(2 * (2 * d)) ==
              doctest::Approx(2 * buffer_clear_timeout(2 * d)).epsilon(1e-12));
        CHECK(buffer_clear_timeout(2 * d) == doctest::Approx(4 * d).epsilon(1e-12));
    }
}

TEST_CASE("throughput table values are exact") {
    CHECK(throughput_curve(100) == 0.05);
    CHECK(throughput_curve(500) == 0.25);
    CHECK(throughput_curve(1000) == 0.50);
    CHECK(throughput_curve(1500) == 0.75);
    CHECK(throughput_curve(2000) == 1.00);
    CHECK(throughput_curve(2500) == 0.75);
    CHECK(throughput_curve(3000) == 0.50);
    CHECK(throughput_curve(3500) == 0.25);
    CHECK(throughput_curve(0) == 0.0);
    CHECK(throughput_curve(4000) == 0.0);
    CHECK(throughput_curve(9999) == 0.0);
}

TEST_CASE("throughput curve shape: continuous, peak at saturation, symmetric") {
    // Peak exactly where the offered rate equals capacity.
    CHECK(throughput_curve(2000) == 1.0);
    for (double rate = 0; rate <= 4000; rate += 50)
        if (rate != 2000) CHECK(throughput_curve(rate) < 1.0);
    // Symmetry about the peak on [0, 2] in normalized rate.
    for (double delta = 0; delta <= 2000; delta += 100)
        CHECK(throughput_curve(2000 - delta) ==
              doctest::Approx(throughput_curve(2000 + delta)).epsilon(1e-12));
    // No jumps: adjacent samples differ by at most the slope step.
    double prev = throughput_curve(0);
    for (double rate = 10; rate <= 4200; rate += 10) {
        double cur = throughput_curve(rate);
        CHECK(std::fabs(cur - prev) < 0.0051);
        prev = cur;
    }
}

TEST_CASE("buffering-router closed form") {
    CHECK(ftn_closed_form(0.5).timeout_s == doctest::Approx(1.050));
    CHECK(ftn_closed_form(0.5).latency_s == doctest::Approx(1.100));
    CHECK(ftn_closed_form(1.0).timeout_s == doctest::Approx(1.050));
    CHECK(ftn_closed_form(1.0).latency_s == doctest::Approx(1.600));
    CHECK(ftn_closed_form(1.5).timeout_s == doctest::Approx(2.150));
    CHECK(ftn_closed_form(2.5).timeout_s == doctest::Approx(3.250));
    CHECK(ftn_closed_form(4.0).timeout_s == doctest::Approx(4.350));
    CHECK(ftn_closed_form(4.0).latency_s == doctest::Approx(4.600));
    CHECK(ftn_closed_form(4.5).timeout_s == doctest::Approx(5.450));
    CHECK(ftn_closed_form(4.5).latency_s == doctest::Approx(5.100));
    CHECK_THROWS_AS(ftn_closed_form(-0.1), std::domain_error);
}

TEST_CASE("source-retransmission closed form") {
    CHECK(conventional_closed_form(0.5).timeout_s == doctest::Approx(1.200));
    CHECK(conventional_closed_form(0.5).latency_s == doctest::Approx(1.800));
    CHECK(conventional_closed_form(1.0).latency_s == doctest::Approx(1.800));
    CHECK(conventional_closed_form(1.5).timeout_s == doctest::Approx(2.400));
    CHECK(conventional_closed_form(1.5).latency_s == doctest::Approx(3.000));
    CHECK(conventional_closed_form(2.5).timeout_s == doctest::Approx(3.600));
    CHECK(conventional_closed_form(2.5).latency_s == doctest::Approx(4.200));
    CHECK(conventional_closed_form(4.5).timeout_s == doctest::Approx(4.800));
    CHECK(conventional_closed_form(4.5).latency_s == doctest::Approx(5.400));
    // Degenerate: no fault, the first transmission succeeds.
    CHECK(conventional_closed_form(0).timeout_s == doctest::Approx(1.200));
    CHECK(conventional_closed_form(0).latency_s == doctest::Approx(0.600));
}
