#include "spadsim/quench.hpp"

#include <cmath>

#include "spadsim/errors.hpp"

namespace spadsim {

void ActiveQuenchParams::validate() const {
    if (t_sense == 0) throw config_error("t_sense_ps must be positive");
    if (t_quench == 0) throw config_error("t_quench_ps must be positive");
    if (t_recover == 0) throw config_error("t_recover_ps must be positive");
    if (!(v_over_max > 0.0)) throw config_error("quench v_over_max must be positive");
}

void PassiveQuenchParams::validate() const {
    if (!(r_s > 0.0)) throw config_error("r_s must be positive");
    if (!(r_l > 0.0)) throw config_error("r_l must be positive");
    if (!(rearm_fraction > 0.0) || !(rearm_fraction < 1.0))
        throw config_error("rearm_fraction must lie in (0,1)");
}

double passive_recovery_tau(const SpadParams& p, const PassiveQuenchParams& q) {
    return q.r_s * p.c_spad;
}

double recovered_overvoltage(double v_nominal, double tau_s, double dt_s) {
    if (dt_s <= 0.0) return 0.0;
    return v_nominal * -std::expm1(-dt_s / tau_s);
}

double passive_relative_efficiency(const EfficiencyCurve& de, double v_nominal,
                                   double tau_s, double dt_s) {
    const double full = de(v_nominal);
    if (full <= 0.0) return 0.0;
    return de(recovered_overvoltage(v_nominal, tau_s, dt_s)) / full;
}

bool passive_latches(const SpadParams& p, const PassiveQuenchParams& q, double v_nominal) {
    return v_nominal / q.r_s >= p.i_latch;
}

}  // namespace spadsim
