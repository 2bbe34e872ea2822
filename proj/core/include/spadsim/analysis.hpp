#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "spadsim/units.hpp"

namespace spadsim {

struct RateEstimate {
    double rate_hz = 0.0;
    double stderr_hz = 0.0;  // Poisson: sqrt(n) / window
    std::uint64_t n = 0;
};

// Pulses inside [t0, t1), divided by the window.
RateEstimate estimate_rate(const std::vector<picoseconds>& pulses, picoseconds t0,
                           picoseconds t1);

struct InterarrivalHistogram {
    picoseconds bin_width = 0;
    std::vector<std::uint64_t> counts;  // bin i covers [i*w, (i+1)*w)
    std::uint64_t underflow = 0;        // always 0 for ordered pulse records
    std::uint64_t overflow = 0;         // gaps at or beyond the last bin
    picoseconds min_gap = 0;            // exact, in ps; 0 when fewer than 2 pulses
    std::uint64_t n_gaps = 0;
};

InterarrivalHistogram interarrival_histogram(const std::vector<picoseconds>& pulses,
                                             picoseconds bin_width, std::size_t n_bins);

// Counting-loss model for a non-paralyzable front end with dead time d:
// observed = dark + true / (1 + true * d). corrected_rate inverts it exactly
// when dark is measured separately.
double measured_rate_nonparalyzable(double true_rate, double dark_rate, double dead_time_s);
double corrected_rate(double measured_rate, double dark_rate, double dead_time_s);

// Reference curve for a paralyzable front end: true * exp(-true * d),
// peaking at 1 / (e * d).
double measured_rate_paralyzable(double true_rate, double dead_time_s);

struct SnrPoint {
    double v_over = 0.0;
    double snr = 0.0;      // (signal - dark) / dark
    double snr_rel = 0.0;  // snr divided by its value at v_norm
};

// Signal-to-noise across an overvoltage sweep; v_norm must match one of the
// grid points.
std::vector<SnrPoint> snr_curve(const std::vector<double>& v_over,
                                const std::vector<double>& signal_rate,
                                const std::vector<double>& dark_rate, double v_norm);

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_stderr = 0.0;
    double r2 = 0.0;
};

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

// y = amplitude * exp(rate * x), fitted in log space; requires y > 0.
struct ExponentialFit {
    double amplitude = 0.0;
    double rate = 0.0;
    double r2_log = 0.0;
};

ExponentialFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y);

// ln y as a polynomial in ln x; coefficients constant-first, directly usable
// as an LED calibration. Solved on centered abscissae for conditioning, then
// expanded back. Requires x, y > 0 and enough points for the degree; a fit
// whose slope changes sign inside the data range is rejected, because a
// calibration must map intensity to current uniquely.
std::vector<double> fit_polynomial_loglog(const std::vector<double>& x,
                                          const std::vector<double>& y, int degree);

// y = offset + amplitude * exp(-t / tau), profiled least squares: for each
// candidate tau the linear pair (offset, amplitude) is solved exactly and a
// golden-section search over log tau picks the minimum residual.
struct ExpOffsetFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double tau_s = 0.0;
    double rss = 0.0;
};

ExpOffsetFit fit_exponential_offset(const std::vector<double>& t_s,
                                    const std::vector<double>& y, double tau_lo,
                                    double tau_hi);

struct RateProbe {
    double intensity = 0.0;
    double rate = 0.0;
};

struct MaxRateResult {
    double intensity = 0.0;  // argmax, or the range top when saturating
    double max_rate = 0.0;
    bool saturating = false;  // response still rising at the top of the range
    std::vector<RateProbe> probes;
};

// Golden-section search for the source intensity maximizing the measured
// rate, on a log10 intensity axis. Tolerates a noisy measure; every probe is
// recorded in evaluation order.
MaxRateResult max_rate_search(const std::function<double(double)>& measure,
                              double intensity_lo, double intensity_hi, int n_iter = 40);

}  // namespace spadsim
