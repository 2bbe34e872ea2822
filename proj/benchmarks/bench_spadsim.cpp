#include <benchmark/benchmark.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "spadsim/analysis.hpp"
#include "spadsim/engine.hpp"
#include "spadsim/rng.hpp"

using namespace spadsim;

namespace {

// Items are generator events (offered photons plus dark carriers), the unit
// the engine's run time actually scales with.
void bm_engine_active(benchmark::State& state) {
    SimConfig cfg;
    cfg.mode = QuenchMode::active;
    cfg.photon_rate = 5e6;
    cfg.de_override = 1.0;
    cfg.duration_s = 0.005;
    cfg.record_pulses = false;
    std::uint64_t events = 0;
    for (auto _ : state) {
        ++cfg.seed;
        const SimResult r = run_simulation(cfg);
        events += r.n_photons_offered + r.n_dark_pulses;
        benchmark::DoNotOptimize(r.n_pulses);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(bm_engine_active);

void bm_engine_passive(benchmark::State& state) {
    SimConfig cfg;
    cfg.mode = QuenchMode::passive;
    cfg.photon_rate = 1e6;
    cfg.duration_s = 0.005;
    cfg.record_pulses = false;
    std::uint64_t events = 0;
    for (auto _ : state) {
        ++cfg.seed;
        const SimResult r = run_simulation(cfg);
        events += r.n_photons_offered + r.n_dark_pulses;
        benchmark::DoNotOptimize(r.n_pulses);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(bm_engine_passive);

void bm_engine_thermal_feedback(benchmark::State& state) {
    SimConfig cfg;
    cfg.mode = QuenchMode::active;
    cfg.photon_rate = 5e6;
    cfg.thermal_feedback = true;
    cfg.duration_s = 0.005;
    cfg.record_pulses = false;
    std::uint64_t events = 0;
    for (auto _ : state) {
        ++cfg.seed;
        const SimResult r = run_simulation(cfg);
        events += r.n_photons_offered + r.n_dark_pulses;
        benchmark::DoNotOptimize(r.n_pulses);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(events));
}
BENCHMARK(bm_engine_thermal_feedback);

void bm_interarrival_histogram(benchmark::State& state) {
    RngStream gaps(7);
    std::vector<picoseconds> pulses(1'000'000);
    picoseconds t = 0;
    for (auto& p : pulses) {
        t += 39000 + next_poisson_gap(gaps, 1e6);
        p = t;
    }
    for (auto _ : state) {
        const InterarrivalHistogram h = interarrival_histogram(pulses, 1000, 200);
        benchmark::DoNotOptimize(h.min_gap);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(pulses.size()));
}
BENCHMARK(bm_interarrival_histogram);

void bm_fit_exponential_offset(benchmark::State& state) {
    std::vector<double> t(500), y(500);
    for (int i = 0; i < 500; ++i) {
        t[i] = 0.01 * i;
        y[i] = 3.0 + 2.0 * std::exp(-t[i] / 0.9);
    }
    for (auto _ : state) {
        const ExpOffsetFit f = fit_exponential_offset(t, y, 0.1, 10.0);
        benchmark::DoNotOptimize(f.tau_s);
    }
}
BENCHMARK(bm_fit_exponential_offset);

}  // namespace

BENCHMARK_MAIN();
