#include "spadsim/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spadsim/errors.hpp"

namespace spadsim {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw config_error(message);
}

}  // namespace

void SpadParams::validate() const {
    require(c_spad > 0.0, "c_spad must be positive");
    require(i_latch > 0.0, "i_latch must be positive");
    require(tempco > 0.0, "tempco must be positive");
    require(de_anchor_lo.v_over > 0.0, "low efficiency anchor must sit above breakdown");
    require(de_anchor_hi.v_over > de_anchor_lo.v_over,
            "efficiency anchors must have increasing overvoltage");
    require(de_anchor_lo.probability > 0.0 && de_anchor_lo.probability < 1.0,
            "low efficiency anchor probability must lie in (0,1)");
    require(de_anchor_hi.probability > de_anchor_lo.probability &&
                de_anchor_hi.probability <= 1.0,
            "efficiency anchor probabilities must be increasing and at most 1");
    // The saturating exponential can only reproduce anchors whose probability
    // ratio exceeds the overvoltage ratio; otherwise no positive scale exists.
    require(de_anchor_lo.probability * de_anchor_hi.v_over >
                de_anchor_hi.probability * de_anchor_lo.v_over,
            "efficiency anchors are inconsistent with a saturating curve");
    require(dark_rate_ref >= 0.0, "dark_rate_ref must be non-negative");
    require(v_over_ref > 0.0, "v_over_ref must be positive");
    require(t_double > 0.0, "t_double must be positive");
    require(dark_floor >= 0.0 && dark_floor <= 1.0, "dark_floor must lie in [0,1]");
    require(ap_p0 >= 0.0 && ap_p0 <= 1.0, "ap_p0 must lie in [0,1]");
    require(ap_slope >= 0.0, "ap_slope must be non-negative");
    require(ap_tau > 0.0, "ap_tau must be positive");
    require(r_th >= 0.0, "r_th must be non-negative");
    require(tau_th > 0.0, "tau_th must be positive");
    require(e_avalanche >= 0.0, "e_avalanche must be non-negative");
}

EfficiencyCurve EfficiencyCurve::solve(const EfficiencyAnchor& lo, const EfficiencyAnchor& hi) {
    const double target = lo.probability / hi.probability;
    const auto ratio = [&](double scale) {
        return std::expm1(-lo.v_over / scale) / std::expm1(-hi.v_over / scale);
    };
    // ratio(scale) falls monotonically from 1 (scale -> 0) toward
    // v_lo / v_hi (scale -> inf); bracket the target and bisect.
    double a = 1e-6;
    double b = 1e9;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (a + b);
        if (ratio(mid) > target)
            a = mid;
        else
            b = mid;
    }
    const double scale = 0.5 * (a + b);
    const double amplitude = hi.probability / -std::expm1(-hi.v_over / scale);
    return EfficiencyCurve(amplitude, scale);
}

EfficiencyCurve EfficiencyCurve::solve(const SpadParams& p) {
    return solve(p.de_anchor_lo, p.de_anchor_hi);
}

double EfficiencyCurve::operator()(double v_over) const {
    if (v_over <= 0.0) return 0.0;
    const double de = amplitude_ * -std::expm1(-v_over / v_scale_);
    return std::clamp(de, 0.0, 1.0);
}

double breakdown_voltage(const SpadParams& p, double t_celsius) {
    return p.v_br_ref + p.tempco * (t_celsius - p.t_ref);
}

double overvoltage(const SpadParams& p, double t_chip, double v_bias) {
    return v_bias - breakdown_voltage(p, t_chip);
}

double detection_efficiency(const SpadParams& p, double v_over) {
    return EfficiencyCurve::solve(p)(v_over);
}

double dark_rate(const SpadParams& p, const EfficiencyCurve& de, double t_chip, double v_over) {
    if (v_over <= 0.0) return 0.0;
    const double thermal = p.dark_rate_ref *
                           std::exp2((t_chip - p.t_dark_ref) / p.t_double);
    const double field = p.dark_floor + (1.0 - p.dark_floor) * de(v_over) / de(p.v_over_ref);
    double boost = 0.0;
    if (p.ap_p0 > 0.0)
        boost = std::max(0.0, p.ap_slope * (v_over - p.ap_knee)) / p.ap_p0;
    return thermal * field * (1.0 + boost);
}

double dark_rate(const SpadParams& p, double t_chip, double v_over) {
    return dark_rate(p, EfficiencyCurve::solve(p), t_chip, v_over);
}

double afterpulse_probability(const SpadParams& p, double v_over) {
    const double prob = p.ap_p0 + std::max(0.0, p.ap_slope * (v_over - p.ap_knee));
    return std::clamp(prob, 0.0, 1.0);
}

double min_passive_tau(const SpadParams& p, double v_over) {
    return v_over / p.i_latch * p.c_spad;
}

double resolved_avalanche_energy(const SpadParams& p, double v_bias, double v_over) {
    if (p.e_avalanche > 0.0) return p.e_avalanche;
    return p.c_spad * v_bias * std::max(0.0, v_over);
}

void LedParams::validate() const {
    require(!loglog_coeffs.empty(), "LED calibration needs at least one coefficient");
    require(current_lo > 0.0 && current_hi > current_lo,
            "LED current range must be positive and increasing");
    // The rate curve must rise with drive current everywhere in range; check
    // the log-log derivative on a grid.
    const double x_lo = std::log(current_lo);
    const double x_hi = std::log(current_hi);
    constexpr int kGrid = 256;
    for (int i = 0; i <= kGrid; ++i) {
        const double x = x_lo + (x_hi - x_lo) * i / kGrid;
        double deriv = 0.0;
        for (std::size_t k = loglog_coeffs.size(); k-- > 1;)
            deriv = deriv * x + static_cast<double>(k) * loglog_coeffs[k];
        require(deriv > 0.0, "LED calibration curve is not monotone over the current range");
    }
}

double led_photon_rate(const LedParams& led, double current_a, double t_led) {
    if (current_a < led.current_lo || current_a > led.current_hi)
        throw config_error("LED drive current outside the calibrated range");
    const double x = std::log(current_a);
    double y = 0.0;
    for (std::size_t k = led.loglog_coeffs.size(); k-- > 0;)
        y = y * x + led.loglog_coeffs[k];
    const double temp_factor = std::max(0.0, 1.0 + led.tempco_rel * (t_led - led.t_cal));
    return std::exp(y) * temp_factor;
}

void thermal_advance(ThermalState& s, const SpadParams& p, picoseconds now) {
    if (now <= s.last_update) return;
    const double dt = seconds_from_ps(now - s.last_update);
    const double excess = s.t_chip - s.t_case;
    s.t_chip = s.t_case + excess * std::exp(-dt / p.tau_th);
    s.last_update = now;
}

void thermal_deposit(ThermalState& s, const SpadParams& p, double energy_j) {
    s.t_chip += energy_j * p.r_th / p.tau_th;
}

}  // namespace spadsim
