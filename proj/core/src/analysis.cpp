#include "spadsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spadsim/errors.hpp"

namespace spadsim {

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw config_error(message);
}

}  // namespace

RateEstimate estimate_rate(const std::vector<picoseconds>& pulses, picoseconds t0,
                           picoseconds t1) {
    require(t1 > t0, "rate window must be non-empty");
    const auto lo = std::lower_bound(pulses.begin(), pulses.end(), t0);
    const auto hi = std::lower_bound(lo, pulses.end(), t1);
    const auto n = static_cast<std::uint64_t>(hi - lo);
    const double window = seconds_from_ps(t1 - t0);
    return RateEstimate{static_cast<double>(n) / window,
                        std::sqrt(static_cast<double>(n)) / window, n};
}

InterarrivalHistogram interarrival_histogram(const std::vector<picoseconds>& pulses,
                                             picoseconds bin_width, std::size_t n_bins) {
    require(bin_width > 0, "histogram bin width must be positive");
    require(n_bins > 0, "histogram needs at least one bin");
    InterarrivalHistogram h;
    h.bin_width = bin_width;
    h.counts.assign(n_bins, 0);
    if (pulses.size() < 2) return h;
    h.min_gap = std::numeric_limits<picoseconds>::max();
    for (std::size_t i = 1; i < pulses.size(); ++i) {
        const picoseconds gap = pulses[i] - pulses[i - 1];
        h.min_gap = std::min(h.min_gap, gap);
        ++h.n_gaps;
        const picoseconds bin = gap / bin_width;
        if (bin < n_bins)
            ++h.counts[static_cast<std::size_t>(bin)];
        else
            ++h.overflow;
    }
    return h;
}

double measured_rate_nonparalyzable(double true_rate, double dark_rate, double dead_time_s) {
    return dark_rate + true_rate / (1.0 + true_rate * dead_time_s);
}

double corrected_rate(double measured_rate, double dark_rate, double dead_time_s) {
    const double loss = 1.0 - measured_rate * dead_time_s;
    require(loss > 0.0, "measured rate at or beyond the dead-time ceiling");
    return (measured_rate - dark_rate) / loss;
}

double measured_rate_paralyzable(double true_rate, double dead_time_s) {
    return true_rate * std::exp(-true_rate * dead_time_s);
}

std::vector<SnrPoint> snr_curve(const std::vector<double>& v_over,
                                const std::vector<double>& signal_rate,
                                const std::vector<double>& dark_rate, double v_norm) {
    require(v_over.size() == signal_rate.size() && v_over.size() == dark_rate.size(),
            "snr inputs must have matching lengths");
    require(!v_over.empty(), "snr curve needs at least one point");
    std::vector<SnrPoint> points(v_over.size());
    std::size_t norm_index = v_over.size();
    for (std::size_t i = 0; i < v_over.size(); ++i) {
        require(dark_rate[i] > 0.0, "snr needs a positive dark rate");
        points[i].v_over = v_over[i];
        points[i].snr = (signal_rate[i] - dark_rate[i]) / dark_rate[i];
        if (std::abs(v_over[i] - v_norm) < 1e-9) norm_index = i;
    }
    require(norm_index < v_over.size(), "v_norm must match a grid point");
    const double ref = points[norm_index].snr;
    require(ref != 0.0, "snr at the normalization point is zero");
    for (auto& p : points) p.snr_rel = p.snr / ref;
    return points;
}

LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "fit inputs must have matching lengths");
    const std::size_t n = x.size();
    require(n >= 2, "linear fit needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    require(sxx > 0.0, "linear fit abscissae are degenerate");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double rss = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    const double dof = static_cast<double>(n > 2 ? n - 2 : 1);
    f.slope_stderr = std::sqrt(rss / dof / sxx);
    return f;
}

ExponentialFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size(), "fit inputs must have matching lengths");
    std::vector<double> logy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        require(y[i] > 0.0, "exponential fit needs positive ordinates");
        logy[i] = std::log(y[i]);
    }
    const LinearFit lin = fit_linear(x, logy);
    return ExponentialFit{std::exp(lin.intercept), lin.slope, lin.r2};
}

std::vector<double> fit_polynomial_loglog(const std::vector<double>& x,
                                          const std::vector<double>& y, int degree) {
    require(degree >= 1, "polynomial degree must be at least 1");
    require(x.size() == y.size(), "fit inputs must have matching lengths");
    const std::size_t n = x.size();
    const auto terms = static_cast<std::size_t>(degree) + 1;
    require(n >= terms, "polynomial fit needs at least degree+1 points");

    std::vector<double> z(n), w(n);
    double center = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive data");
        z[i] = std::log(x[i]);
        w[i] = std::log(y[i]);
        center += z[i];
    }
    center /= static_cast<double>(n);
    for (auto& v : z) v -= center;

    // Normal equations on the centered abscissae.
    std::vector<double> a(terms * (terms + 1), 0.0);
    const auto at = [&](std::size_t r, std::size_t c) -> double& {
        return a[r * (terms + 1) + c];
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> pow_z(terms);
        pow_z[0] = 1.0;
        for (std::size_t k = 1; k < terms; ++k) pow_z[k] = pow_z[k - 1] * z[i];
        for (std::size_t r = 0; r < terms; ++r) {
            for (std::size_t c = 0; c < terms; ++c) at(r, c) += pow_z[r] * pow_z[c];
            at(r, terms) += pow_z[r] * w[i];
        }
    }

    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < terms; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < terms; ++r)
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
        require(std::abs(at(pivot, col)) > 0.0, "polynomial fit abscissae are degenerate");
        if (pivot != col)
            for (std::size_t c = 0; c <= terms; ++c) std::swap(at(pivot, c), at(col, c));
        for (std::size_t r = 0; r < terms; ++r) {
            if (r == col) continue;
            const double factor = at(r, col) / at(col, col);
            for (std::size_t c = col; c <= terms; ++c) at(r, c) -= factor * at(col, c);
        }
    }
    std::vector<double> centered(terms);
    for (std::size_t k = 0; k < terms; ++k) centered[k] = at(k, terms) / at(k, k);

    // Expand p(z - center) back to raw ln x coefficients via the binomial
    // theorem.
    std::vector<double> coeffs(terms, 0.0);
    for (std::size_t k = 0; k < terms; ++k) {
        // contrib[j] = C(k, j) * (-center)^(k-j), built from the top down
        std::vector<double> contrib(k + 1);
        contrib[k] = 1.0;
        for (std::size_t j = k; j-- > 0;)
            contrib[j] = contrib[j + 1] * -center * static_cast<double>(j + 1) /
                         static_cast<double>(k - j);
        for (std::size_t j = 0; j <= k; ++j) coeffs[j] += centered[k] * contrib[j];
    }

    // A usable calibration is monotone: the slope of the fitted curve must not
    // change sign anywhere inside the data range.
    const auto [z_lo, z_hi] = std::minmax_element(z.begin(), z.end());
    double d_min = std::numeric_limits<double>::infinity();
    double d_max = -d_min;
    for (int s = 0; s <= 256; ++s) {
        const double zc = *z_lo + (*z_hi - *z_lo) * s / 256.0;
        double d = 0.0;
        for (std::size_t k = terms; k-- > 1;)
            d = d * zc + centered[k] * static_cast<double>(k);
        d_min = std::min(d_min, d);
        d_max = std::max(d_max, d);
    }
    require(!(d_min < 0.0 && d_max > 0.0), "fitted calibration curve is not monotone");
    return coeffs;
}

namespace {

// Residual sum of squares for y ~ offset + amplitude * exp(-t / tau), with
// the linear pair solved in closed form.
void profile_exp_offset(const std::vector<double>& t_s, const std::vector<double>& y,
                        double tau, ExpOffsetFit& out) {
    const std::size_t n = t_s.size();
    double su = 0.0, sy = 0.0, suu = 0.0, suy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = std::exp(-t_s[i] / tau);
        su += u;
        sy += y[i];
        suu += u * u;
        suy += u * y[i];
        syy += y[i] * y[i];
    }
    const double dn = static_cast<double>(n);
    const double det = dn * suu - su * su;
    if (det <= 0.0) {
        out = ExpOffsetFit{sy / dn, 0.0, tau, syy - sy * sy / dn};
        return;
    }
    const double amplitude = (dn * suy - su * sy) / det;
    const double offset = (sy - amplitude * su) / dn;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - offset - amplitude * std::exp(-t_s[i] / tau);
        rss += r * r;
    }
    out = ExpOffsetFit{offset, amplitude, tau, rss};
}

}  // namespace

ExpOffsetFit fit_exponential_offset(const std::vector<double>& t_s,
                                    const std::vector<double>& y, double tau_lo,
                                    double tau_hi) {
    require(t_s.size() == y.size(), "fit inputs must have matching lengths");
    require(t_s.size() >= 3, "exponential-offset fit needs at least three points");
    require(tau_lo > 0.0 && tau_hi > tau_lo, "tau search range must be positive and increasing");

    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(tau_lo);
    double b = std::log(tau_hi);
    double x1 = b - golden * (b - a);
    double x2 = a + golden * (b - a);
    ExpOffsetFit f1, f2;
    profile_exp_offset(t_s, y, std::exp(x1), f1);
    profile_exp_offset(t_s, y, std::exp(x2), f2);
    for (int i = 0; i < 80; ++i) {
        if (f1.rss < f2.rss) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - golden * (b - a);
            profile_exp_offset(t_s, y, std::exp(x1), f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + golden * (b - a);
            profile_exp_offset(t_s, y, std::exp(x2), f2);
        }
    }
    return f1.rss < f2.rss ? f1 : f2;
}

MaxRateResult max_rate_search(const std::function<double(double)>& measure,
                              double intensity_lo, double intensity_hi, int n_iter) {
    require(intensity_lo > 0.0 && intensity_hi > intensity_lo,
            "intensity range must be positive and increasing");
    require(n_iter >= 1, "search needs at least one iteration");

    MaxRateResult result;
    const auto probe = [&](double log_intensity) {
        const double intensity = std::pow(10.0, log_intensity);
        const double rate = measure(intensity);
        result.probes.push_back(RateProbe{intensity, rate});
        if (rate > result.max_rate) {
            result.max_rate = rate;
            result.intensity = intensity;
        }
        return rate;
    };

    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log10(intensity_lo);
    double b = std::log10(intensity_hi);
    const double span = b - a;
    probe(a);
    const double rate_at_top = probe(b);
    double x1 = b - golden * (b - a);
    double x2 = a + golden * (b - a);
    double r1 = probe(x1);
    double r2 = probe(x2);
    for (int i = 2; i < n_iter; ++i) {
        if (r1 > r2) {
            b = x2;
            x2 = x1;
            r2 = r1;
            x1 = b - golden * (b - a);
            r1 = probe(x1);
        } else {
            a = x1;
            x1 = x2;
            r1 = r2;
            x2 = a + golden * (b - a);
            r2 = probe(x2);
        }
    }
    // A best probe hugging the top of the range means the response was still
    // rising; report the endpoint itself so callers see an open-ended result.
    result.saturating =
        std::log10(intensity_hi) - std::log10(result.intensity) <= 0.02 * span;
    if (result.saturating) {
        result.intensity = intensity_hi;
        result.max_rate = rate_at_top;
    }
    return result;
}

}  // namespace spadsim
