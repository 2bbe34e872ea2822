#pragma once

#include <vector>

#include "spadsim/units.hpp"

namespace spadsim {

struct EfficiencyAnchor {
    double v_over;       // V above breakdown
    double probability;  // detection efficiency at that overvoltage
};

// Static device parameters. Defaults describe the detector studied here:
// reach-through silicon APD, ~3 pF junction, breakdown in the low 200s of
// volts with a 0.655 V/K temperature coefficient.
struct SpadParams {
    double v_br_ref = 225.0;  // V, breakdown at t_ref
    double t_ref = 21.0;      // degC
    double tempco = 0.655;    // V/K

    double c_spad = 3e-12;   // F
    double i_latch = 50e-6;  // A, below this the avalanche self-sustains

    EfficiencyAnchor de_anchor_lo{3.5, 0.15};
    EfficiencyAnchor de_anchor_hi{25.0, 0.58};

    // Dark-count model. dark_rate_ref is the observed dark avalanche rate at
    // (t_dark_ref, v_over_ref); rate doubles every t_double kelvin. A
    // dark_floor fraction of the generation triggers independently of
    // overvoltage; the rest scales with relative detection efficiency.
    double dark_rate_ref = 2e4;  // Hz
    double t_dark_ref = 20.0;    // degC
    double v_over_ref = 3.5;     // V
    double t_double = 8.0;       // K
    double dark_floor = 0.5;     // [0,1]; 0 = pure DE scaling

    // Afterpulsing: baseline trap probability per avalanche, rising linearly
    // above the knee where quenching starts to degrade.
    double ap_p0 = 0.003;
    double ap_knee = 4.5;    // V
    double ap_slope = 0.02;  // 1/V
    double ap_tau = 100e-9;  // s, trap release time constant

    // Single-pole chip thermal model.
    double r_th = 15.0;         // K/W case to chip
    double tau_th = 1.0;        // s
    double e_avalanche = 0.0;   // J per avalanche; 0 = derive c_spad*v_bias*v_over

    void validate() const;  // throws config_error
};

// Saturating-exponential detection efficiency through the two anchors:
// DE(v) = amplitude * (1 - exp(-v / v_scale)), clamped to [0, 1], zero at or
// below breakdown. Solved once by bisection; cache one of these on hot paths.
class EfficiencyCurve {
public:
    static EfficiencyCurve solve(const EfficiencyAnchor& lo, const EfficiencyAnchor& hi);
    static EfficiencyCurve solve(const SpadParams& p);

    double operator()(double v_over) const;

    double amplitude() const { return amplitude_; }
    double v_scale() const { return v_scale_; }

private:
    EfficiencyCurve(double amplitude, double v_scale)
        : amplitude_(amplitude), v_scale_(v_scale) {}
    double amplitude_;
    double v_scale_;
};

double breakdown_voltage(const SpadParams& p, double t_celsius);
double overvoltage(const SpadParams& p, double t_chip, double v_bias);
double detection_efficiency(const SpadParams& p, double v_over);

// Observed dark avalanche rate at the given chip temperature and overvoltage.
// The curve overload avoids re-solving the anchors per call.
double dark_rate(const SpadParams& p, double t_chip, double v_over);
double dark_rate(const SpadParams& p, const EfficiencyCurve& de, double t_chip, double v_over);

// Trap probability per avalanche: flat at ap_p0 below the knee, linear rise
// above, clamped to [0, 1].
double afterpulse_probability(const SpadParams& p, double v_over);

// Smallest passive quench resistor that still quenches at v_over, expressed
// as the resulting recovery time constant (v_over / i_latch) * c_spad.
double min_passive_tau(const SpadParams& p, double v_over);

// Energy dissipated per avalanche; honors an explicit e_avalanche override.
double resolved_avalanche_energy(const SpadParams& p, double v_bias, double v_over);

// ---- LED source calibration ----

// ln(rate) is a polynomial in ln(current); rate scales linearly with LED
// temperature around the calibration point.
struct LedParams {
    std::vector<double> loglog_coeffs{26.581198991429872, 1.0};  // c0 = ln 3.5e11
    double current_lo = 0.02e-6;   // A
    double current_hi = 200e-6;    // A
    double t_cal = 17.5;           // degC
    double tempco_rel = -0.0058;   // 1/K

    void validate() const;  // throws config_error, rejects non-monotone curves
};

// Photon rate at the detector for a drive current and LED temperature.
double led_photon_rate(const LedParams& led, double current_a, double t_led);

// ---- thermal state ----

struct ThermalState {
    double t_chip;  // degC
    double t_case;  // degC
    picoseconds last_update = 0;
};

// Relax the chip excess toward the case with time constant tau_th.
void thermal_advance(ThermalState& s, const SpadParams& p, picoseconds now);

// Instantaneous deposit of one avalanche: dT = energy_j * r_th / tau_th.
// Steady state under avalanche rate f approaches f * energy_j * r_th.
void thermal_deposit(ThermalState& s, const SpadParams& p, double energy_j);

}  // namespace spadsim
