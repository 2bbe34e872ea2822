#include "spadsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "spadsim/analysis.hpp"
#include "spadsim/engine.hpp"
#include "spadsim/errors.hpp"
#include "spadsim/parallel.hpp"
#include "spadsim/rng.hpp"

namespace spadsim {

namespace {

// Seed-label partitions. Every simulation run by a scenario derives its seed
// as mix_seed(config.seed, partition + offset); partitions never overlap, so
// adding runs to one scenario cannot shift another's draws.
constexpr std::uint64_t kSeedVbr = std::uint64_t{0} << 20;
constexpr std::uint64_t kSeedResponse = std::uint64_t{1} << 20;
constexpr std::uint64_t kSeedDark = std::uint64_t{2} << 20;
constexpr std::uint64_t kSeedNoise = std::uint64_t{3} << 20;
constexpr std::uint64_t kSeedSnr = std::uint64_t{4} << 20;
constexpr std::uint64_t kSeedLinearity = std::uint64_t{5} << 20;
constexpr std::uint64_t kSeedFmax = std::uint64_t{6} << 20;
constexpr std::uint64_t kSeedDynamic = std::uint64_t{7} << 20;
constexpr std::uint64_t kSeedDeadTime = std::uint64_t{8} << 20;
constexpr std::uint64_t kSeedPassive = std::uint64_t{9} << 20;
constexpr std::uint64_t kSeedBreakdownSearch = std::uint64_t{1} << 40;

SimConfig base_sim(const ScenarioConfig& c) {
    SimConfig sim;
    sim.spad = c.spad;
    sim.active = c.active;
    sim.passive = c.passive;
    sim.v_bias = c.v_bias;
    sim.t_case = c.t_case;
    sim.record_pulses = false;
    return sim;
}

std::uint64_t point_seed(const ScenarioConfig& c, std::uint64_t partition,
                         std::uint64_t offset) {
    return mix_seed(c.seed, partition + offset);
}

// Scenario sweeps identify the failing point when a run blows up.
SimResult run_point(const SimConfig& sim, const std::string& where) {
    try {
        return run_simulation(sim);
    } catch (const sim_error& e) {
        throw sim_error(where + ": " + e.what());
    }
}

double pulse_rate(const SimResult& r, double duration_s) {
    return static_cast<double>(r.n_pulses) / duration_s;
}

double dead_time_seconds(const ScenarioConfig& c) {
    return seconds_from_ps(c.active.dead_time());
}

// Overvoltage grid shared by the overvoltage sweeps: 0.5 V to the configured
// cap in 0.25 V steps.
std::vector<double> overvoltage_grid(const ScenarioConfig& c) {
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        const double v = 0.5 + 0.25 * i;
        if (v > c.v_over_max + 1e-9) break;
        grid.push_back(v);
    }
    if (grid.empty()) throw config_error("v_over_max leaves no sweep points above 0.5 V");
    return grid;
}

struct RatePair {
    double rate = 0.0;
    double duration = 0.0;
};

}  // namespace

BiasController::BiasController(double v_min, double v_max, double step) {
    if (!(step > 0.0)) throw config_error("bias step must be positive");
    if (!(v_min >= 0.0) || !(v_max > v_min)) throw config_error("bias range must be increasing and non-negative");
    step_ = step;
    lo_ = std::lround(v_min / step);
    hi_ = std::lround(v_max / step);
}

double BiasController::quantize(double request) const {
    const long idx = std::clamp(std::lround(request / step_), lo_, hi_);
    return at_index(idx);
}

long BiasController::index_of(double quantized) const {
    return std::lround(quantized / step_);
}

double BiasController::at_index(long index) const {
    return static_cast<double>(index) * step_;
}

double find_breakdown(const ScenarioConfig& config, double t_case,
                      double dark_threshold_hz, const BiasController& bias,
                      std::uint64_t seed_salt) {
    if (!(dark_threshold_hz > 0.0)) throw config_error("dark threshold must be positive");

    // Dark-only probe at one supply setting. A short pass settles clearly
    // supercritical points cheaply; only near the threshold does the longer
    // pass run.
    const auto probe = [&](long index, int stage) {
        SimConfig sim = base_sim(config);
        sim.t_case = t_case;
        sim.v_bias = bias.at_index(index);
        sim.duration_s = (stage == 0 ? 0.02 : 0.5) * config.duration_scale;
        sim.seed = point_seed(config, kSeedBreakdownSearch,
                              (seed_salt << 20) +
                                  static_cast<std::uint64_t>(index) * 2 +
                                  static_cast<std::uint64_t>(stage));
        const SimResult r =
            run_point(sim, "breakdown probe at " + format_double(sim.v_bias) + " V");
        return pulse_rate(r, sim.duration_s);
    };
    const auto above = [&](long index) {
        if (probe(index, 0) >= 10.0 * dark_threshold_hz) return true;
        return probe(index, 1) >= dark_threshold_hz;
    };

    long lo = bias.min_index();
    long hi = bias.max_index();
    if (above(lo)) return bias.at_index(lo);
    if (!above(hi))
        throw sim_error("dark rate never reaches " + format_double(dark_threshold_hz) +
                        " Hz within the bias range");
    while (hi - lo > 1) {
        const long mid = lo + (hi - lo) / 2;
        if (above(mid))
            hi = mid;
        else
            lo = mid;
    }
    return bias.at_index(hi);
}

namespace {

// ---- vbr_vs_temp -----------------------------------------------------------
// Dark-onset supply search at each case temperature; the fitted slope is the
// breakdown tempco.

ScenarioResult scenario_vbr_vs_temp(const ScenarioConfig& c) {
    const BiasController bias;
    std::vector<double> temps;
    for (int i = 0; i < 8; ++i) temps.push_back(-25.0 + 5.0 * i);

    std::vector<double> found(temps.size());
    parallel_for(temps.size(), c.workers, [&](std::size_t i) {
        found[i] = find_breakdown(c, temps[i], 100.0, bias, i);
    });

    ScenarioResult out;
    out.table.columns = {"t_case_c", "v_breakdown_v"};
    for (std::size_t i = 0; i < temps.size(); ++i) out.table.add_row({temps[i], found[i]});

    const LinearFit fit = fit_linear(temps, found);
    out.stats = {
        {"tempco_fit_v_per_k", fit.slope},
        {"tempco_stderr_v_per_k", fit.slope_stderr},
        {"v_breakdown_at_t_ref_v", fit.intercept + fit.slope * c.spad.t_ref},
        {"fit_r2", fit.r2},
    };
    return out;
}

// ---- response_vs_temp ------------------------------------------------------
// Constant light, constant overvoltage above the searched breakdown. The LED
// sits outside the cooled enclosure, so its drive stays at the calibration
// temperature. Corrected response should be flat across temperature.

ScenarioResult scenario_response_vs_temp(const ScenarioConfig& c) {
    const BiasController bias;
    const double led_current = 20e-6;
    const double f_emit = led_photon_rate(c.led, led_current, c.led.t_cal);
    const double d = dead_time_seconds(c);

    std::vector<double> temps;
    for (int i = 0; i < 12; ++i) temps.push_back(-25.0 + 5.0 * i);

    struct Row {
        double v_breakdown, v_bias, f_raw, f_dark;
    };
    std::vector<Row> rows(temps.size());
    parallel_for(temps.size(), c.workers, [&](std::size_t i) {
        Row& row = rows[i];
        row.v_breakdown = find_breakdown(c, temps[i], 100.0, bias, 256 + i);
        row.v_bias = bias.quantize(row.v_breakdown + c.spad.v_over_ref);

        SimConfig sim = base_sim(c);
        sim.t_case = temps[i];
        sim.v_bias = row.v_bias;
        sim.photon_rate = f_emit;
        sim.duration_s = 1.5 * c.duration_scale;
        sim.seed = point_seed(c, kSeedResponse, i * 2);
        row.f_raw = pulse_rate(
            run_point(sim, "response at " + format_double(temps[i]) + " C"), sim.duration_s);

        sim.photon_rate = 0.0;
        sim.duration_s = 1.0 * c.duration_scale;
        sim.seed = point_seed(c, kSeedResponse, i * 2 + 1);
        row.f_dark = pulse_rate(
            run_point(sim, "dark companion at " + format_double(temps[i]) + " C"),
            sim.duration_s);
    });

    ScenarioResult out;
    out.table.columns = {"t_case_c", "v_breakdown_v", "v_bias_v", "f_emit_hz",
                         "f_raw_hz", "f_dark_hz",     "f_corr_hz"};
    std::vector<double> corrected(temps.size());
    for (std::size_t i = 0; i < temps.size(); ++i) {
        const Row& row = rows[i];
        corrected[i] = corrected_rate(row.f_raw, row.f_dark, d);
        out.table.add_row({temps[i], row.v_breakdown, row.v_bias, f_emit, row.f_raw,
                           row.f_dark, corrected[i]});
    }

    const LinearFit fit = fit_linear(temps, corrected);
    double mean = 0.0;
    for (const double v : corrected) mean += v;
    mean /= static_cast<double>(corrected.size());
    out.stats = {
        {"mean_response_hz", mean},
        {"response_slope_hz_per_k", fit.slope},
        {"response_slope_stderr_hz_per_k", fit.slope_stderr},
        {"response_slope_t_stat", fit.slope_stderr > 0.0 ? fit.slope / fit.slope_stderr : 0.0},
    };
    return out;
}

// ---- dark_vs_temp ----------------------------------------------------------
// Dark rate at fixed overvoltage across temperature; log-linear with the
// configured doubling interval.

ScenarioResult scenario_dark_vs_temp(const ScenarioConfig& c) {
    const BiasController bias;
    const double d = dead_time_seconds(c);

    std::vector<double> temps;
    for (int i = 0; i < 11; ++i) temps.push_back(-30.0 + 5.0 * i);

    std::vector<double> biases(temps.size()), overs(temps.size()), raw(temps.size());
    parallel_for(temps.size(), c.workers, [&](std::size_t i) {
        const double v_br = breakdown_voltage(c.spad, temps[i]);
        biases[i] = bias.quantize(v_br + c.spad.v_over_ref);
        overs[i] = biases[i] - v_br;

        SimConfig sim = base_sim(c);
        sim.t_case = temps[i];
        sim.v_bias = biases[i];
        // Longer dwell where the dark rate is lowest, so the cold end of the
        // fit carries comparable weight.
        sim.duration_s = (temps[i] <= -20.0 ? 4.0 : 2.0) * c.duration_scale;
        sim.seed = point_seed(c, kSeedDark, i);
        raw[i] = pulse_rate(run_point(sim, "dark sweep at " + format_double(temps[i]) + " C"),
                            sim.duration_s);
    });

    ScenarioResult out;
    out.table.columns = {"t_case_c", "v_bias_v", "v_over_v", "dark_rate_hz",
                         "dark_rate_corr_hz"};
    std::vector<double> corr(temps.size());
    for (std::size_t i = 0; i < temps.size(); ++i) {
        corr[i] = corrected_rate(raw[i], 0.0, d);
        out.table.add_row({temps[i], biases[i], overs[i], raw[i], corr[i]});
    }

    const ExponentialFit fit = fit_exponential(temps, corr);
    out.stats = {
        {"t_double_fit_k", fit.rate > 0.0 ? std::log(2.0) / fit.rate : 0.0},
        {"fit_r2_log", fit.r2_log},
        {"dark_rate_at_t_ref_hz", fit.amplitude * std::exp(fit.rate * c.spad.t_dark_ref)},
    };
    return out;
}

// ---- noise_signal_vs_overvoltage -------------------------------------------
// Dark and weak-constant-light counting rates across the overvoltage range at
// the configured case temperature.

ScenarioResult scenario_noise_signal(const ScenarioConfig& c) {
    const BiasController bias;
    const std::vector<double> grid = overvoltage_grid(c);
    const double v_br = breakdown_voltage(c.spad, c.t_case);
    const double offered = 1e5;

    std::vector<double> dark(grid.size()), lit(grid.size()), biases(grid.size());
    parallel_for(grid.size(), c.workers, [&](std::size_t i) {
        biases[i] = bias.quantize(v_br + grid[i]);
        SimConfig sim = base_sim(c);
        sim.v_bias = biases[i];
        sim.duration_s = 2.0 * c.duration_scale;
        sim.seed = point_seed(c, kSeedNoise, i * 2);
        dark[i] = pulse_rate(
            run_point(sim, "dark at " + format_double(grid[i]) + " V over"), sim.duration_s);

        sim.photon_rate = offered;
        sim.seed = point_seed(c, kSeedNoise, i * 2 + 1);
        lit[i] = pulse_rate(
            run_point(sim, "lit at " + format_double(grid[i]) + " V over"), sim.duration_s);
    });

    ScenarioResult out;
    out.table.columns = {"v_over_v",     "v_over_actual_v", "v_bias_v",
                         "dark_rate_hz", "lit_rate_hz",     "net_signal_hz"};
    double peak_net = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double net = lit[i] - dark[i];
        peak_net = std::max(peak_net, net);
        out.table.add_row({grid[i], biases[i] - v_br, biases[i], dark[i], lit[i], net});
    }
    out.stats = {
        {"offered_rate_hz", offered},
        {"peak_net_signal_hz", peak_net},
        {"dark_rate_at_cap_hz", dark.back()},
    };
    return out;
}

// ---- snr_vs_overvoltage ----------------------------------------------------
// Normalized signal-to-noise across overvoltage, repeated at three case
// temperatures and four light levels. Dark runs are shared between the levels
// at one temperature. Durations shrink as rates grow, keeping every point's
// relative error below about half a percent.

ScenarioResult scenario_snr(const ScenarioConfig& c) {
    const BiasController bias;
    const std::vector<double> grid = overvoltage_grid(c);
    const std::vector<double> temps = {-25.0, 0.0, 20.0};
    const std::vector<double> dark_dur = {90.0, 45.0, 30.0};
    const std::vector<double> levels = {3e4, 1e5, 3e5, 1e6};
    const std::vector<double> level_dur = {12.0, 5.0, 2.5, 1.2};
    const std::size_t nv = grid.size();

    std::vector<double> dark(temps.size() * nv);
    std::vector<double> lit(temps.size() * levels.size() * nv);

    const std::size_t n_dark_jobs = temps.size() * nv;
    const std::size_t n_jobs = n_dark_jobs + temps.size() * levels.size() * nv;
    parallel_for(n_jobs, c.workers, [&](std::size_t job) {
        if (job < n_dark_jobs) {
            const std::size_t ti = job / nv;
            const std::size_t vi = job % nv;
            SimConfig sim = base_sim(c);
            sim.t_case = temps[ti];
            sim.v_bias = bias.quantize(breakdown_voltage(c.spad, temps[ti]) + grid[vi]);
            sim.duration_s = dark_dur[ti] * c.duration_scale;
            sim.seed = point_seed(c, kSeedSnr, ti * 64 + vi);
            dark[job] = pulse_rate(
                run_point(sim, "snr dark at " + format_double(grid[vi]) + " V over"),
                sim.duration_s);
            return;
        }
        const std::size_t k = job - n_dark_jobs;
        const std::size_t ti = k / (levels.size() * nv);
        const std::size_t li = (k / nv) % levels.size();
        const std::size_t vi = k % nv;
        SimConfig sim = base_sim(c);
        sim.t_case = temps[ti];
        sim.v_bias = bias.quantize(breakdown_voltage(c.spad, temps[ti]) + grid[vi]);
        sim.photon_rate = levels[li];
        sim.duration_s = level_dur[li] * c.duration_scale;
        sim.seed = point_seed(c, kSeedSnr, 4096 + (ti * levels.size() + li) * 64 + vi);
        lit[k] = pulse_rate(
            run_point(sim, "snr signal at " + format_double(grid[vi]) + " V over"),
            sim.duration_s);
    });

    ScenarioResult out;
    out.table.columns = {"t_case_c", "signal_level_hz", "v_over_v", "signal_rate_hz",
                         "dark_rate_hz", "snr", "snr_rel"};

    double argmax_lo = grid.back(), argmax_hi = grid.front();
    double shift_max = 0.0;
    double norm_err = 0.0;
    for (std::size_t ti = 0; ti < temps.size(); ++ti) {
        double t_lo = grid.back(), t_hi = grid.front();
        for (std::size_t li = 0; li < levels.size(); ++li) {
            std::vector<double> sig(nv), drk(nv);
            for (std::size_t vi = 0; vi < nv; ++vi) {
                sig[vi] = lit[(ti * levels.size() + li) * nv + vi];
                drk[vi] = dark[ti * nv + vi];
            }
            const auto curve = snr_curve(grid, sig, drk, c.spad.v_over_ref);
            double best_v = grid[0], best = curve[0].snr_rel;
            for (std::size_t vi = 0; vi < nv; ++vi) {
                const auto& p = curve[vi];
                out.table.add_row({temps[ti], levels[li], p.v_over, sig[vi], drk[vi],
                                   p.snr, p.snr_rel});
                if (p.snr_rel > best) {
                    best = p.snr_rel;
                    best_v = p.v_over;
                }
                if (std::abs(p.v_over - c.spad.v_over_ref) < 1e-9)
                    norm_err = std::max(norm_err, std::abs(p.snr_rel - 1.0));
            }
            out.stats.push_back({"argmax_v_t" + std::to_string(ti) + "_l" + std::to_string(li),
                                 best_v});
            out.stats.push_back({"peak_snr_rel_t" + std::to_string(ti) + "_l" + std::to_string(li),
                                 best});
            t_lo = std::min(t_lo, best_v);
            t_hi = std::max(t_hi, best_v);
        }
        shift_max = std::max(shift_max, t_hi - t_lo);
        argmax_lo = std::min(argmax_lo, t_lo);
        argmax_hi = std::max(argmax_hi, t_hi);
    }
    out.stats.push_back({"argmax_shift_max_v", shift_max});
    out.stats.push_back({"argmax_lo_v", argmax_lo});
    out.stats.push_back({"argmax_hi_v", argmax_hi});
    out.stats.push_back({"norm_point_max_abs_err", norm_err});
    return out;
}

// ---- linearity -------------------------------------------------------------
// Source-calibrated counting linearity across four decades of drive current,
// run cold so dark counts stay far below the weakest signal. Deviation is
// measured between the dead-time- and dark-corrected rate and the thinned
// emission rate.

ScenarioResult scenario_linearity(const ScenarioConfig& c) {
    const BiasController bias;
    const double t_cold = -25.0;
    const double v_br = breakdown_voltage(c.spad, t_cold);
    const double v_bias = bias.quantize(v_br + c.spad.v_over_ref);
    const double v_over = v_bias - v_br;
    const double de = detection_efficiency(c.spad, v_over);
    const double d = dead_time_seconds(c);

    const int n_points = 25;
    std::vector<double> currents(n_points);
    for (int k = 0; k < n_points; ++k) {
        const double f = static_cast<double>(k) / (n_points - 1);
        const double raw = c.led.current_lo *
                           std::pow(c.led.current_hi / c.led.current_lo, f);
        currents[k] = std::clamp(raw, c.led.current_lo, c.led.current_hi);
    }

    double f_dark = 0.0;
    {
        SimConfig sim = base_sim(c);
        sim.t_case = t_cold;
        sim.v_bias = v_bias;
        sim.duration_s = 60.0 * c.duration_scale;
        sim.seed = point_seed(c, kSeedLinearity, 1000);
        f_dark = pulse_rate(run_point(sim, "linearity dark"), sim.duration_s);
    }

    std::vector<double> emit(n_points), meas(n_points), dur(n_points);
    parallel_for(currents.size(), c.workers, [&](std::size_t k) {
        emit[k] = led_photon_rate(c.led, currents[k], c.led.t_cal);
        dur[k] = std::clamp(2e5 / (emit[k] * de + f_dark), 0.3, 30.0) * c.duration_scale;
        SimConfig sim = base_sim(c);
        sim.t_case = t_cold;
        sim.v_bias = v_bias;
        sim.photon_rate = emit[k];
        sim.duration_s = dur[k];
        sim.seed = point_seed(c, kSeedLinearity, k);
        meas[k] = pulse_rate(
            run_point(sim, "linearity at " + format_double(currents[k]) + " A"),
            sim.duration_s);
    });

    ScenarioResult out;
    out.table.columns = {"current_a", "f_emit_hz", "f_true_hz", "f_meas_hz",
                         "f_dark_hz", "f_corr_hz", "deviation_rel", "duration_s"};
    double worst = 0.0;
    int n_below = 0;
    for (int k = 0; k < n_points; ++k) {
        const double f_true = emit[k] * de;
        const double f_corr = corrected_rate(meas[k], f_dark, d);
        const double deviation = (f_corr - f_true) / f_true;
        out.table.add_row({currents[k], emit[k], f_true, meas[k], f_dark, f_corr,
                           deviation, dur[k]});
        if (f_true <= 1e7) {
            worst = std::max(worst, std::abs(deviation));
            ++n_below;
        }
    }
    out.stats = {
        {"t_case_c", t_cold},
        {"de_operating", de},
        {"dark_rate_hz", f_dark},
        {"max_abs_deviation_below_10mhz", worst},
        {"n_points_below_10mhz", static_cast<double>(n_below)},
    };
    return out;
}

// ---- fmax_vs_overvoltage ---------------------------------------------------
// Measured rate at a strong fixed source across overvoltage, repeated at
// three case temperatures with thermal feedback off; plus an intensity ladder
// at the top operating point showing the approach to the dead-time ceiling.

ScenarioResult scenario_fmax(const ScenarioConfig& c) {
    const BiasController bias;
    const std::vector<double> temps = {-20.0, 0.0, 20.0};
    std::vector<double> grid;
    for (const double v : {2.0, 3.0, 4.0, 5.0})
        if (v <= c.v_over_max + 1e-9) grid.push_back(v);
    if (grid.empty() || c.v_over_max > grid.back() + 1e-9) grid.push_back(c.v_over_max);
    const double offered = 3e8;

    std::vector<double> rate(temps.size() * grid.size());
    std::vector<double> biases(rate.size());
    parallel_for(rate.size(), c.workers, [&](std::size_t j) {
        const std::size_t ti = j / grid.size();
        const std::size_t vi = j % grid.size();
        SimConfig sim = base_sim(c);
        sim.t_case = temps[ti];
        sim.v_bias = bias.quantize(breakdown_voltage(c.spad, temps[ti]) + grid[vi]);
        biases[j] = sim.v_bias;
        sim.photon_rate = offered;
        sim.duration_s = 0.01 * c.duration_scale;
        sim.seed = point_seed(c, kSeedFmax, ti * 16 + vi);
        rate[j] = pulse_rate(
            run_point(sim, "fmax grid at " + format_double(grid[vi]) + " V over"),
            sim.duration_s);
    });

    const double ladder_v = std::min(5.0, c.v_over_max);
    const std::vector<double> ladder_i = {1e7, 3e7, 1e8, 3e8, 1e9};
    const std::vector<double> ladder_dur = {0.03, 0.03, 0.02, 0.01, 0.004};
    std::vector<double> ladder_rate(ladder_i.size());
    parallel_for(ladder_i.size(), c.workers, [&](std::size_t k) {
        SimConfig sim = base_sim(c);
        sim.t_case = 20.0;
        sim.v_bias = bias.quantize(breakdown_voltage(c.spad, 20.0) + ladder_v);
        sim.photon_rate = ladder_i[k];
        sim.duration_s = ladder_dur[k] * c.duration_scale;
        sim.seed = point_seed(c, kSeedFmax, 512 + k);
        ladder_rate[k] = pulse_rate(
            run_point(sim, "fmax ladder at " + format_double(ladder_i[k]) + " offered"),
            sim.duration_s);
    });

    ScenarioResult out;
    out.table.columns = {"t_case_c", "v_over_v", "v_bias_v", "offered_rate_hz",
                         "measured_rate_hz"};
    for (std::size_t j = 0; j < rate.size(); ++j) {
        const std::size_t ti = j / grid.size();
        const std::size_t vi = j % grid.size();
        out.table.add_row({temps[ti], grid[vi], biases[j], offered, rate[j]});
    }
    Table ladder;
    ladder.columns = {"offered_rate_hz", "measured_rate_hz"};
    for (std::size_t k = 0; k < ladder_i.size(); ++k)
        ladder.add_row({ladder_i[k], ladder_rate[k]});
    out.aux = ladder;
    out.aux_name = "ladder";

    double spread_max = 0.0;
    for (std::size_t vi = 0; vi < grid.size(); ++vi) {
        double lo = rate[vi], hi = rate[vi], sum = 0.0;
        for (std::size_t ti = 0; ti < temps.size(); ++ti) {
            const double r = rate[ti * grid.size() + vi];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            sum += r;
        }
        spread_max = std::max(spread_max, (hi - lo) / (sum / static_cast<double>(temps.size())));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < ladder_rate.size(); ++k)
        if (ladder_rate[k] < ladder_rate[k - 1] * 0.99) monotone = false;

    const double bound = 1.0 / dead_time_seconds(c);
    double rate_v5_t20 = 0.0;
    for (std::size_t vi = 0; vi < grid.size(); ++vi)
        if (std::abs(grid[vi] - ladder_v) < 1e-9) rate_v5_t20 = rate[2 * grid.size() + vi];
    out.stats = {
        {"dead_time_bound_hz", bound},
        {"rate_at_top_point_hz", rate_v5_t20},
        {"ladder_top_hz", ladder_rate.back()},
        {"ladder_top_fraction_of_bound", ladder_rate.back() / bound},
        {"ladder_monotone", monotone ? 1.0 : 0.0},
        {"max_temp_spread_rel", spread_max},
    };
    return out;
}

// ---- dynamic_response ------------------------------------------------------
// Source stepped between a low and a high level halfway through the run, with
// thermal feedback on and off. With feedback on the chip warms at the step
// and the rate droops with the thermal time constant; with feedback off both
// plateaus stay flat.

ScenarioResult scenario_dynamic(const ScenarioConfig& c) {
    const BiasController bias;
    const double t_dyn = 6.0;
    const double v_br = breakdown_voltage(c.spad, t_dyn);
    const double v_bias = bias.quantize(v_br + c.spad.v_over_ref);
    const double de = detection_efficiency(c.spad, v_bias - v_br);
    const double rate_lo = 2.5e5 / de;
    const double rate_hi = 5.5e6 / de;
    const double t_step = 5.0 * c.duration_scale;
    const double d = dead_time_seconds(c);

    std::vector<SimResult> results(2);
    parallel_for(2, c.workers, [&](std::size_t fb) {
        SimConfig sim = base_sim(c);
        sim.t_case = t_dyn;
        sim.v_bias = v_bias;
        sim.thermal_feedback = fb == 0;
        sim.photon_rate = rate_lo;
        sim.photon_schedule = {{ps_from_seconds(t_step), rate_hi}};
        sim.duration_s = 2.0 * t_step;
        sim.sample_interval_s = 0.01 * c.duration_scale;
        sim.seed = point_seed(c, kSeedDynamic, fb);
        results[fb] = run_point(sim, fb == 0 ? "step response, feedback on"
                                             : "step response, feedback off");
    });

    const double sample_s = 0.01 * c.duration_scale;
    ScenarioResult out;
    out.table.columns = {"feedback_on", "time_s", "rate_raw_hz",
                         "rate_deadtime_corrected_hz", "t_chip_c"};
    Table trace;
    trace.columns = out.table.columns;

    for (std::size_t fb = 0; fb < 2; ++fb) {
        const auto& samples = results[fb].samples;
        const double flag = fb == 0 ? 1.0 : 0.0;
        std::uint64_t acc = 0;
        for (std::size_t s = 0; s < samples.size(); ++s) {
            const double t_s = seconds_from_ps(samples[s].time);
            const double raw = static_cast<double>(samples[s].pulses) / sample_s;
            trace.add_row({flag, t_s, raw, corrected_rate(raw, 0.0, d), samples[s].t_chip});
            acc += samples[s].pulses;
            if ((s + 1) % 10 == 0) {
                const double bin_rate = static_cast<double>(acc) / (10.0 * sample_s);
                out.table.add_row({flag, t_s, bin_rate, corrected_rate(bin_rate, 0.0, d),
                                   samples[s].t_chip});
                acc = 0;
            }
        }
    }
    out.aux = trace;
    out.aux_name = "trace";

    // Thermal time constant from the feedback-on chip temperature after the
    // step; the rate plateaus give the droop numbers.
    const auto plateau_rate = [&](const SimResult& r, double from_s, double to_s) {
        std::uint64_t n = 0;
        std::uint64_t bins = 0;
        for (const auto& s : r.samples) {
            const double t_s = seconds_from_ps(s.time);
            if (t_s > from_s && t_s <= to_s) {
                n += s.pulses;
                ++bins;
            }
        }
        return bins ? static_cast<double>(n) / (static_cast<double>(bins) * sample_s) : 0.0;
    };

    std::vector<double> fit_t, fit_y;
    std::vector<double> off_t, off_rate;
    for (const auto& s : results[0].samples) {
        const double t_s = seconds_from_ps(s.time);
        if (t_s > t_step) {
            fit_t.push_back(t_s - t_step);
            fit_y.push_back(s.t_chip);
        }
    }
    for (const auto& s : results[1].samples) {
        const double t_s = seconds_from_ps(s.time);
        if (t_s > t_step) {
            off_t.push_back(t_s - t_step);
            off_rate.push_back(static_cast<double>(s.pulses) / sample_s);
        }
    }
    const ExpOffsetFit fit = fit_exponential_offset(fit_t, fit_y, c.spad.tau_th / 8.0,
                                                    c.spad.tau_th * 8.0);
    const LinearFit off_fit = fit_linear(off_t, off_rate);

    const double tail_on = plateau_rate(results[0], 2.0 * t_step - 0.1 * t_step, 2.0 * t_step);
    const double head_on = plateau_rate(results[0], t_step, t_step + 0.1 * t_step);
    const double tail_off = plateau_rate(results[1], 2.0 * t_step - 0.1 * t_step, 2.0 * t_step);
    const double head_off = plateau_rate(results[1], t_step, t_step + 0.1 * t_step);

    out.stats = {
        {"tau_fit_s", fit.tau_s},
        {"tau_fit_over_tau_th", fit.tau_s / c.spad.tau_th},
        {"droop_on_rel", tail_on > 0.0 ? (head_on - tail_on) / tail_on : 0.0},
        {"droop_off_rel", tail_off > 0.0 ? (head_off - tail_off) / tail_off : 0.0},
        {"off_plateau_slope_t_stat",
         off_fit.slope_stderr > 0.0 ? off_fit.slope / off_fit.slope_stderr : 0.0},
        {"t_chip_rise_k", results[0].final_t_chip - t_dyn},
    };
    return out;
}

// ---- dead_time -------------------------------------------------------------
// High-rate interarrival histogram; the minimum gap is the front end's dead
// time and no mass sits below it.

ScenarioResult scenario_dead_time(const ScenarioConfig& c) {
    const BiasController bias;
    const double v_br = breakdown_voltage(c.spad, c.t_case);

    SimConfig sim = base_sim(c);
    sim.v_bias = bias.quantize(v_br + c.spad.v_over_ref);
    sim.photon_rate = 3e8;
    sim.duration_s = 0.07 * c.duration_scale;
    sim.record_pulses = true;
    sim.seed = point_seed(c, kSeedDeadTime, 0);
    const SimResult r = run_point(sim, "dead-time record");

    const auto hist = interarrival_histogram(r.pulses, 1000, 200);
    const picoseconds dead = c.active.dead_time();
    std::uint64_t below = 0;
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        if ((b + 1) * hist.bin_width <= dead) below += hist.counts[b];

    ScenarioResult out;
    out.table.columns = {"gap_bin_start_ns", "count"};
    for (std::size_t b = 0; b < hist.counts.size(); ++b)
        out.table.add_row({static_cast<double>(b), static_cast<double>(hist.counts[b])});
    out.stats = {
        {"dead_time_ps", static_cast<double>(dead)},
        {"min_gap_ps", static_cast<double>(hist.min_gap)},
        {"n_pulses", static_cast<double>(r.n_pulses)},
        {"n_gaps", static_cast<double>(hist.n_gaps)},
        {"count_below_dead_time", static_cast<double>(below)},
        {"overflow_gaps", static_cast<double>(hist.overflow)},
    };
    return out;
}

// ---- passive_baseline ------------------------------------------------------
// Passive front end driven across intensity: the emitted pulse rate rises,
// peaks, and collapses as recovery pileup takes over. A peak search brackets
// the maximum attainable rate.

ScenarioResult scenario_passive(const ScenarioConfig& c) {
    const BiasController bias;
    const double v_br = breakdown_voltage(c.spad, c.t_case);
    const double v_bias = bias.quantize(v_br + c.spad.v_over_ref);

    const auto run_passive = [&](double offered, double duration,
                                 std::uint64_t offset) {
        SimConfig sim = base_sim(c);
        sim.mode = QuenchMode::passive;
        sim.v_bias = v_bias;
        sim.photon_rate = offered;
        sim.duration_s = duration;
        sim.seed = point_seed(c, kSeedPassive, offset);
        return run_point(sim, "passive at " + format_double(offered) + " offered");
    };

    const int n_grid = 9;
    std::vector<double> offered(n_grid), dur(n_grid), prate(n_grid), arate(n_grid);
    std::vector<double> latched(n_grid, 0.0);
    parallel_for(n_grid, c.workers, [&](std::size_t k) {
        offered[k] = std::pow(10.0, 5.0 + 0.5 * static_cast<double>(k));
        dur[k] = (offered[k] <= 1e7 ? 0.05 : offered[k] <= 1e8 ? 0.02 : 0.01) *
                 c.duration_scale;
        const SimResult r = run_passive(offered[k], dur[k], k);
        prate[k] = pulse_rate(r, dur[k]);
        arate[k] = static_cast<double>(r.n_pulses + r.n_suppressed) / dur[k];
        latched[k] = r.latched ? 1.0 : 0.0;
    });

    // Peak search; probes shorten as the offered rate grows so no single
    // probe dominates the budget.
    std::uint64_t probe_count = 0;
    const auto measure = [&](double intensity) {
        const double duration =
            std::min(0.02, 4e5 / intensity) * c.duration_scale;
        const SimResult r = run_passive(intensity, duration, 100 + probe_count++);
        return static_cast<double>(r.n_pulses) / duration;
    };
    const MaxRateResult search = max_rate_search(measure, 1e5, 1e9, 22);

    ScenarioResult out;
    out.table.columns = {"offered_rate_hz", "pulse_rate_hz", "avalanche_rate_hz",
                         "latched", "duration_s"};
    double grid_peak = 0.0;
    for (int k = 0; k < n_grid; ++k) {
        grid_peak = std::max(grid_peak, prate[k]);
        out.table.add_row({offered[k], prate[k], arate[k], latched[k], dur[k]});
    }
    Table probes;
    probes.columns = {"offered_rate_hz", "pulse_rate_hz"};
    for (const auto& p : search.probes) probes.add_row({p.intensity, p.rate});
    out.aux = probes;
    out.aux_name = "probes";

    out.stats = {
        {"peak_rate_hz", search.max_rate},
        {"peak_offered_hz", search.intensity},
        {"saturating", search.saturating ? 1.0 : 0.0},
        {"grid_peak_rate_hz", grid_peak},
        {"recovery_tau_s", passive_recovery_tau(c.spad, c.passive)},
        {"latches_at_nominal", passive_latches(c.spad, c.passive, v_bias - v_br) ? 1.0 : 0.0},
    };
    return out;
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_list() {
    static const std::vector<ScenarioInfo> list = {
        {"vbr_vs_temp",
         "breakdown voltage versus case temperature from a dark-onset bias search, "
         "with a linear tempco fit"},
        {"response_vs_temp",
         "constant-light response at fixed overvoltage across temperature, raw and "
         "corrected"},
        {"dark_vs_temp",
         "dark count rate versus temperature at fixed overvoltage, with an "
         "exponential doubling fit"},
        {"noise_signal_vs_overvoltage",
         "dark and weak-light counting rates across the overvoltage range at one "
         "temperature"},
        {"snr_vs_overvoltage",
         "normalized signal-to-noise versus overvoltage at three temperatures and "
         "four light levels"},
        {"linearity",
         "counting linearity against the calibrated source across four decades of "
         "drive current, dead-time and dark corrected"},
        {"fmax_vs_overvoltage",
         "measured rate at a strong source versus overvoltage at three "
         "temperatures, plus an intensity ladder at the top operating point"},
        {"dynamic_response",
         "step response between two light levels with thermal feedback on and off"},
        {"dead_time",
         "high-rate interarrival histogram; verifies the hard minimum pulse "
         "spacing"},
        {"passive_baseline",
         "passively quenched counting rate versus intensity with a peak search"},
    };
    return list;
}

bool scenario_exists(const std::string& name) {
    for (const auto& info : scenario_list())
        if (info.name == name) return true;
    return false;
}

ScenarioResult run_scenario(const std::string& name, const ScenarioConfig& config) {
    config.validate();
    if (name == "vbr_vs_temp") return scenario_vbr_vs_temp(config);
    if (name == "response_vs_temp") return scenario_response_vs_temp(config);
    if (name == "dark_vs_temp") return scenario_dark_vs_temp(config);
    if (name == "noise_signal_vs_overvoltage") return scenario_noise_signal(config);
    if (name == "snr_vs_overvoltage") return scenario_snr(config);
    if (name == "linearity") return scenario_linearity(config);
    if (name == "fmax_vs_overvoltage") return scenario_fmax(config);
    if (name == "dynamic_response") return scenario_dynamic(config);
    if (name == "dead_time") return scenario_dead_time(config);
    if (name == "passive_baseline") return scenario_passive(config);
    throw config_error("unknown scenario: " + name);
}

}  // namespace spadsim
