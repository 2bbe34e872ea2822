#pragma once

#include "spadsim/device_model.hpp"
#include "spadsim/units.hpp"

namespace spadsim {

enum class QuenchMode { active, passive };

// Actively quenched front end: a comparator senses the avalanche, the bias is
// pulled below breakdown, then restored. The detector is blind for exactly
// t_sense + t_quench + t_recover after each avalanche and fully armed again
// at the boundary instant, so the circuit is non-paralyzable and the minimum
// spacing between output pulses equals dead_time().
struct ActiveQuenchParams {
    picoseconds t_sense = 20000;    // ps, avalanche onset to quench assertion
    picoseconds t_quench = 16000;   // ps, bias held below breakdown
    picoseconds t_recover = 3000;   // ps, bias restored to nominal
    double v_over_max = 5.0;        // V, highest overvoltage the loop quenches cleanly;
                                    // above it afterpulsing grows but pulses still form

    picoseconds dead_time() const { return t_sense + t_quench + t_recover; }
    void validate() const;  // throws config_error
};

// Passively quenched front end: a series resistor starves the avalanche and
// the junction recharges through it with time constant r_s * c_spad.
// A carrier arriving dt after the last avalanche sees only the partially
// recovered overvoltage; an avalanche counts as an output pulse only when
// recovery has reached rearm_fraction of nominal, otherwise it silently
// restarts the recharge.
struct PassiveQuenchParams {
    double r_s = 220e3;          // ohm, series quench resistor
    double r_l = 220.0;          // ohm, pickup resistor; no effect on timing
    double rearm_fraction = 0.8; // of nominal overvoltage

    void validate() const;  // throws config_error
};

// Recharge time constant in seconds.
double passive_recovery_tau(const SpadParams& p, const PassiveQuenchParams& q);

// Overvoltage dt_s seconds after an avalanche dropped it to zero.
double recovered_overvoltage(double v_nominal, double tau_s, double dt_s);

// Trigger probability for a carrier during recovery, relative to a fully
// recharged junction.
double passive_relative_efficiency(const EfficiencyCurve& de, double v_nominal,
                                   double tau_s, double dt_s);

// True when the quench resistor cannot starve the avalanche: the steady
// current v_nominal / r_s reaches i_latch and the detector sticks after
// its first pulse.
bool passive_latches(const SpadParams& p, const PassiveQuenchParams& q, double v_nominal);

}  // namespace spadsim
