#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "spadsim/engine.hpp"
#include "spadsim/errors.hpp"
#include "spadsim/units.hpp"

using namespace spadsim;

namespace {

// Ideal front end: unit efficiency, no dark counts, no thermal feedback, so
// the output is governed purely by arrival statistics and the quench timing.
SimConfig ideal_active(double photon_rate, double duration_s, std::uint64_t seed) {
    SimConfig cfg;
    cfg.mode = QuenchMode::active;
    cfg.photon_rate = photon_rate;
    cfg.de_override = 1.0;
    cfg.spad.dark_rate_ref = 0.0;
    cfg.spad.ap_p0 = 0.0;
    cfg.duration_s = duration_s;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("output gaps beyond the dead time are exponential") {
    // Non-paralyzable with Poisson arrivals: gap = dead_time + Exp(rate).
    // Shift the gaps, bin them, and compare against the exponential law with
    // the rate estimated from the sample mean. 31 cells, one estimated
    // parameter: 29 degrees of freedom; 49.5878... is the 0.99 quantile.
    const SimConfig cfg = ideal_active(1e6, 0.125, 777);
    const SimResult r = run_simulation(cfg);
    REQUIRE(r.pulses.size() > 100000);
    CHECK(r.min_pulse_gap >= 39000);

    const picoseconds dead = cfg.active.dead_time();
    std::vector<double> shifted;
    shifted.reserve(r.pulses.size());
    double sum = 0.0;
    for (std::size_t i = 1; i < r.pulses.size(); ++i) {
        const double g = static_cast<double>(r.pulses[i] - r.pulses[i - 1] - dead);
        shifted.push_back(g);
        sum += g;
    }
    const double mean = sum / static_cast<double>(shifted.size());
    CHECK(mean == doctest::Approx(1e6).epsilon(0.02));  // 1 / (1 MHz) in ps

    constexpr double kBinWidth = 200000.0;
    constexpr int kBins = 30;
    std::vector<double> observed(kBins + 1, 0.0);
    for (const double g : shifted) {
        const int bin = static_cast<int>(g / kBinWidth);
        ++observed[bin < kBins ? bin : kBins];
    }
    const double n = static_cast<double>(shifted.size());
    double chi2 = 0.0;
    for (int b = 0; b <= kBins; ++b) {
        const double lo = kBinWidth * b;
        const double p = b < kBins
                             ? std::exp(-lo / mean) - std::exp(-(lo + kBinWidth) / mean)
                             : std::exp(-lo / mean);
        const double expected = p * n;
        REQUIRE(expected > 5.0);
        chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
    }
    CHECK(chi2 < 49.587884472898831);
}

TEST_CASE("observed rate follows the non-paralyzable loss curve") {
    // Offered 5 MHz against 39 ns dead time: expected 4184100.42 Hz.
    const SimResult r = run_simulation(ideal_active(5e6, 0.2, 31));
    const double rate = static_cast<double>(r.n_pulses) / 0.2;
    const double sigma = std::sqrt(static_cast<double>(r.n_pulses)) / 0.2;
    CHECK(std::abs(rate - 4184100.4184100418) < 4.0 * sigma);
    CHECK(r.n_photon_pulses == r.n_pulses);
    CHECK(r.n_suppressed > 0);
}

TEST_CASE("dark generation runs at the configured reference rate") {
    SimConfig cfg;
    cfg.mode = QuenchMode::active;
    cfg.photon_rate = 0.0;
    cfg.spad.ap_p0 = 0.0;
    cfg.v_bias = 227.845;  // exactly v_over_ref above breakdown at 20 C
    cfg.duration_s = 2.0;
    cfg.seed = 8;
    const SimResult r = run_simulation(cfg);
    const double rate = static_cast<double>(r.n_pulses) / cfg.duration_s;
    // 2e4 Hz offered through the dead time: 19984.4 Hz observed.
    CHECK(std::abs(rate - 19984.4) < 400.0);
    CHECK(r.n_dark_pulses == r.n_pulses);
    CHECK(r.n_photons_offered == 0);
}

TEST_CASE("photon thinning matches the efficiency at the operating point") {
    SimConfig cfg;
    cfg.mode = QuenchMode::active;
    cfg.photon_rate = 1e4;
    cfg.spad.dark_rate_ref = 0.0;
    cfg.spad.ap_p0 = 0.0;
    cfg.v_bias = 227.845;  // efficiency anchor: DE = 0.15 exactly
    cfg.duration_s = 200.0;
    cfg.record_pulses = false;
    cfg.seed = 99;
    const SimResult r = run_simulation(cfg);
    REQUIRE(r.n_photons_offered > 1500000);
    const double p = static_cast<double>(r.n_photon_pulses) /
                     static_cast<double>(r.n_photons_offered);
    CHECK(p > 0.1489);  // 0.15 with a 4-sigma binomial margin
    CHECK(p < 0.1511);
}

TEST_CASE("afterpulsing produces the expected secondary fraction") {
    SimConfig cfg = ideal_active(2e5, 2.0, 4242);
    cfg.spad.ap_p0 = 0.1;
    cfg.record_pulses = false;
    const SimResult r = run_simulation(cfg);
    REQUIRE(r.n_pulses > 100000);
    const double ratio = static_cast<double>(r.n_afterpulse_pulses) /
                         static_cast<double>(r.n_pulses);
    // Trap probability 0.1, but releases inside the 39 ns dead window are
    // absorbed; the surviving fraction lands near 0.073.
    CHECK(ratio > 0.060);
    CHECK(ratio < 0.085);

    cfg.spad.ap_p0 = 0.0;
    const SimResult clean = run_simulation(cfg);
    CHECK(clean.n_afterpulse_pulses == 0);
}

TEST_CASE("minimum pulse spacing never violates the dead time") {
    for (int i = 0; i < 12; ++i) {
        SimConfig cfg;
        cfg.mode = QuenchMode::active;
        cfg.photon_rate = std::pow(10.0, 4.0 + 0.25 * i);
        cfg.de_override = 1.0;
        cfg.active.t_sense = 10000 + 2000 * static_cast<picoseconds>(i);
        cfg.active.t_quench = 16000 - 1000 * static_cast<picoseconds>(i);
        cfg.active.t_recover = 3000 + 500 * static_cast<picoseconds>(i);
        cfg.duration_s = 0.02;
        cfg.record_pulses = false;
        cfg.seed = 1000 + static_cast<std::uint64_t>(i);
        const SimResult r = run_simulation(cfg);
        REQUIRE(r.n_pulses >= 2);
        CHECK(r.min_pulse_gap >= cfg.active.dead_time());
    }
}

TEST_CASE("passive mode suppresses most avalanches when overdriven") {
    SimConfig cfg;
    cfg.mode = QuenchMode::passive;
    cfg.photon_rate = 3e7;
    cfg.de_override = 1.0;
    cfg.spad.dark_rate_ref = 0.0;
    cfg.duration_s = 0.02;
    cfg.record_pulses = false;
    cfg.seed = 5;
    const SimResult r = run_simulation(cfg);
    const double avalanches = static_cast<double>(r.n_pulses + r.n_suppressed);
    REQUIRE(avalanches > 1000.0);
    CHECK(r.n_suppressed > r.n_pulses);
    CHECK(static_cast<double>(r.n_pulses) < 0.2 * avalanches);
    CHECK(!r.latched);
}

TEST_CASE("passive mode counts cleanly at low rates and honors the rearm gap") {
    SimConfig cfg;
    cfg.mode = QuenchMode::passive;
    cfg.photon_rate = 1e4;
    cfg.de_override = 1.0;
    cfg.spad.dark_rate_ref = 0.0;
    cfg.duration_s = 0.5;
    cfg.seed = 6;
    const SimResult r = run_simulation(cfg);
    REQUIRE(r.n_pulses > 4000);
    const double avalanches = static_cast<double>(r.n_pulses + r.n_suppressed);
    CHECK(static_cast<double>(r.n_pulses) > 0.9 * avalanches);
    // tau = r_s * c_spad = 660 ns; 80% recovery takes tau * ln 5 = 1.062 us.
    CHECK(r.min_pulse_gap >= 1060000);
}

TEST_CASE("passive mode latches when the quench resistor cannot starve the arc") {
    SimConfig cfg;
    cfg.mode = QuenchMode::passive;
    cfg.photon_rate = 1e6;
    cfg.de_override = 1.0;
    cfg.spad.dark_rate_ref = 0.0;
    cfg.v_bias = 239.345;  // 15 V over breakdown: steady current exceeds i_latch
    cfg.duration_s = 0.01;
    cfg.seed = 7;
    const SimResult r = run_simulation(cfg);
    CHECK(r.latched);
    CHECK(r.n_pulses == 1);
    CHECK(r.n_suppressed > 1000);
}

TEST_CASE("thermal feedback heats the chip toward the dissipation limit") {
    SimConfig cfg = ideal_active(1e7, 0.3, 11);
    cfg.spad.e_avalanche = 2e-9;
    cfg.thermal_feedback = true;
    cfg.record_pulses = false;
    const SimResult on = run_simulation(cfg);
    // Rate 7.19 MHz, 2 nJ per pulse, r_th 15 K/W, tau 1 s: after 0.3 s the
    // excess is 0.216 K * (1 - e^-0.3) = 0.0559 K.
    CHECK(on.final_t_chip - 20.0 > 0.04);
    CHECK(on.final_t_chip - 20.0 < 0.07);

    cfg.thermal_feedback = false;
    const SimResult off = run_simulation(cfg);
    CHECK(off.final_t_chip == 20.0);
}

TEST_CASE("source schedule switches the rate on and off mid-run") {
    SimConfig cfg = ideal_active(0.0, 1.0, 13);
    cfg.photon_schedule = {{500'000'000'000, 1e6}, {800'000'000'000, 0.0}};
    const SimResult r = run_simulation(cfg);
    REQUIRE(r.n_pulses > 0);
    CHECK(r.pulses.front() >= 500'000'000'000);
    CHECK(r.pulses.back() < 800'000'000'000);
    // 0.3 s at an observed 962464 Hz, with a 5-sigma margin.
    CHECK(r.n_pulses > 286000);
    CHECK(r.n_pulses < 291450);
}

TEST_CASE("periodic samples partition the run exactly") {
    SimConfig cfg = ideal_active(1e6, 0.1, 21);
    cfg.sample_interval_s = 0.01;
    const SimResult r = run_simulation(cfg);
    REQUIRE(r.samples.size() == 10);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
        CHECK(r.samples[i].time == (i + 1) * 10'000'000'000ULL);
        CHECK(r.samples[i].t_chip == 20.0);
        total += r.samples[i].pulses;
    }
    CHECK(total == r.n_pulses);
}

TEST_CASE("a run with no sources finishes instantly and empty") {
    SimConfig cfg = ideal_active(0.0, 1.0, 1);
    const SimResult r = run_simulation(cfg);
    CHECK(r.n_pulses == 0);
    CHECK(r.n_photons_offered == 0);
    CHECK(r.pulses.empty());
    CHECK(r.min_pulse_gap == std::numeric_limits<picoseconds>::max());
    CHECK(r.final_t_chip == 20.0);
    CHECK(!r.latched);
}

TEST_CASE("runaway afterpulse cascades hit the event queue cap") {
    SimConfig cfg = ideal_active(2e6, 4.0, 17);
    cfg.spad.ap_p0 = 1.0;
    cfg.spad.ap_tau = 1.0;  // traps outlive the run; the backlog only grows
    cfg.record_pulses = false;
    CHECK_THROWS_WITH_AS((void)run_simulation(cfg), "event queue overflow", sim_error);
}

TEST_CASE("identical seeds reproduce identical runs") {
    SimConfig cfg;
    cfg.photon_rate = 1e5;
    cfg.duration_s = 0.05;
    cfg.seed = 42;
    const SimResult a = run_simulation(cfg);
    const SimResult b = run_simulation(cfg);
    CHECK(a.n_pulses == b.n_pulses);
    CHECK(a.n_suppressed == b.n_suppressed);
    CHECK(a.pulses == b.pulses);

    cfg.seed = 43;
    const SimResult c = run_simulation(cfg);
    CHECK(a.pulses != c.pulses);
}

TEST_CASE("simulation config validation rejects malformed runs") {
    SimConfig cfg;
    cfg.photon_schedule = {{0, 1e6}};
    CHECK_THROWS_WITH_AS(cfg.validate(),
                         "photon_schedule times must be strictly increasing and positive",
                         config_error);
    cfg.photon_schedule = {{100, 1e6}, {100, 2e6}};
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg.photon_schedule = {{100, -1.0}};
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = SimConfig{};
    cfg.de_override = 1.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), "de_override must be at most 1", config_error);

    cfg = SimConfig{};
    cfg.duration_s = 0.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = SimConfig{};
    cfg.photon_rate = -1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = SimConfig{};
    cfg.sample_interval_s = -1.0;
    CHECK_THROWS_AS(cfg.validate(), config_error);

    cfg = SimConfig{};
    cfg.duration_s = 1e-13;  // valid as a number, but rounds to zero ps
    CHECK_THROWS_AS((void)run_simulation(cfg), config_error);
}
