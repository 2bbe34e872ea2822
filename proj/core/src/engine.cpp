#include "spadsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "spadsim/errors.hpp"
#include "spadsim/rng.hpp"

namespace spadsim {

void SimConfig::validate() const {
    spad.validate();
    if (mode == QuenchMode::active)
        active.validate();
    else
        passive.validate();
    if (v_bias < 0.0) throw config_error("v_bias must be non-negative");
    if (!(photon_rate >= 0.0)) throw config_error("photon_rate must be non-negative");
    picoseconds prev = 0;
    for (const auto& entry : photon_schedule) {
        if (entry.first <= prev)
            throw config_error("photon_schedule times must be strictly increasing and positive");
        prev = entry.first;
        if (!(entry.second >= 0.0))
            throw config_error("scheduled photon rate must be non-negative");
    }
    if (!(de_override <= 1.0)) throw config_error("de_override must be at most 1");
    if (!(duration_s > 0.0)) throw config_error("duration_s must be positive");
    if (!(sample_interval_s >= 0.0)) throw config_error("sample_interval_s must be non-negative");
}

namespace {

constexpr picoseconds kNever = std::numeric_limits<picoseconds>::max();
constexpr std::size_t kQueueCap = std::size_t{1} << 20;

enum class EventKind : std::uint8_t { trap_release, intensity_change };

struct Event {
    picoseconds time;
    std::uint64_t seq;
    EventKind kind;
    double value;  // intensity_change payload
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

enum class CarrierOrigin : std::uint8_t { photon, dark, trap };

class Simulator {
public:
    explicit Simulator(const SimConfig& cfg)
        : cfg_(cfg),
          streams_(RngStreams::make(cfg.seed)),
          de_curve_(EfficiencyCurve::solve(cfg.spad)) {}

    SimResult run();

private:
    void refresh_voltage_state() {
        v_over_ = overvoltage(cfg_.spad, thermal_.t_chip, cfg_.v_bias);
        de_ = de_curve_(v_over_);
        p_ap_ = afterpulse_probability(cfg_.spad, v_over_);
        energy_ = resolved_avalanche_energy(cfg_.spad, cfg_.v_bias, v_over_);
        t_chip_at_voltage_ = thermal_.t_chip;
    }

    void maybe_refresh_voltage_state() {
        if (std::abs(thermal_.t_chip - t_chip_at_voltage_) > 0.02)
            refresh_voltage_state();
    }

    void maybe_refresh_dark_rate() {
        if (std::abs(thermal_.t_chip - t_chip_at_dark_) > 0.1) {
            dark_rate_ = dark_rate(cfg_.spad, de_curve_, thermal_.t_chip, v_over_);
            t_chip_at_dark_ = thermal_.t_chip;
        }
    }

    double thinning_efficiency() const {
        return cfg_.de_override >= 0.0 ? cfg_.de_override : de_;
    }

    void push_event(picoseconds time, EventKind kind, double value) {
        if (heap_.size() >= kQueueCap) throw sim_error("event queue overflow");
        heap_.push(Event{time, seq_++, kind, value});
    }

    void schedule_photon(picoseconds from) {
        next_photon_ = photon_rate_ > 0.0
                           ? from + next_poisson_gap(streams_.photon, photon_rate_)
                           : kNever;
        next_photon_seq_ = seq_++;
    }

    void schedule_dark(picoseconds from) {
        next_dark_ = dark_rate_ > 0.0
                         ? from + next_poisson_gap(streams_.dark, dark_rate_)
                         : kNever;
        next_dark_seq_ = seq_++;
    }

    void emit_pulse(picoseconds t, CarrierOrigin origin) {
        ++result_.n_pulses;
        switch (origin) {
            case CarrierOrigin::photon: ++result_.n_photon_pulses; break;
            case CarrierOrigin::dark: ++result_.n_dark_pulses; break;
            case CarrierOrigin::trap: ++result_.n_afterpulse_pulses; break;
        }
        if (have_pulse_)
            result_.min_pulse_gap = std::min(result_.min_pulse_gap, t - last_pulse_);
        last_pulse_ = t;
        have_pulse_ = true;
        ++pulses_in_bin_;
        if (cfg_.record_pulses) result_.pulses.push_back(t);
    }

    // Shared avalanche bookkeeping: heat, trap creation, counters. The
    // voltage_fraction scales the deposited energy for partially recovered
    // passive avalanches.
    void avalanche(picoseconds t, CarrierOrigin origin, double voltage_fraction, bool pulse) {
        if (cfg_.thermal_feedback) {
            advance_thermal(t);
            thermal_deposit(thermal_, cfg_.spad, energy_ * voltage_fraction);
            maybe_refresh_voltage_state();
        }
        if (pulse)
            emit_pulse(t, origin);
        else
            ++result_.n_suppressed;
        if (p_ap_ > 0.0 && streams_.afterpulse.next_unit() < p_ap_) {
            const picoseconds release =
                t + next_poisson_gap(streams_.afterpulse, 1.0 / cfg_.spad.ap_tau);
            if (release < t_end_) push_event(release, EventKind::trap_release, 0.0);
        }
    }

    void process_carrier(picoseconds t, CarrierOrigin origin) {
        if (result_.latched) {
            ++result_.n_suppressed;
            return;
        }
        if (cfg_.mode == QuenchMode::active) {
            // Non-paralyzable: carriers inside the dead window are absorbed
            // without extending it; the boundary instant is armed again.
            if (t < dead_until_) {
                ++result_.n_suppressed;
                return;
            }
            avalanche(t, origin, 1.0, true);
            dead_until_ = t + dead_time_;
            return;
        }
        // Passive: the junction recharges continuously; a carrier sees the
        // partially recovered overvoltage.
        double fraction = 1.0;
        if (recovering_) {
            const double dt_s = seconds_from_ps(t - last_avalanche_);
            fraction = -std::expm1(-dt_s / recovery_tau_);
            const double rel =
                de_ > 0.0 ? de_curve_(v_over_ * fraction) / de_ : 0.0;
            if (!(streams_.thinning.next_unit() < rel)) return;
        }
        last_avalanche_ = t;
        recovering_ = true;
        avalanche(t, origin, fraction, fraction >= cfg_.passive.rearm_fraction);
        if (will_latch_) result_.latched = true;
    }

    void advance_thermal(picoseconds now) { thermal_advance(thermal_, cfg_.spad, now); }

    const SimConfig& cfg_;
    RngStreams streams_;
    EfficiencyCurve de_curve_;
    SimResult result_;

    ThermalState thermal_{};
    double v_over_ = 0.0;
    double de_ = 0.0;
    double p_ap_ = 0.0;
    double energy_ = 0.0;
    double t_chip_at_voltage_ = 0.0;
    double t_chip_at_dark_ = 0.0;
    double dark_rate_ = 0.0;
    double photon_rate_ = 0.0;

    picoseconds t_end_ = 0;
    picoseconds dead_time_ = 0;
    double recovery_tau_ = 0.0;
    bool will_latch_ = false;

    picoseconds next_photon_ = kNever;
    std::uint64_t next_photon_seq_ = 0;
    picoseconds next_dark_ = kNever;
    std::uint64_t next_dark_seq_ = 0;
    picoseconds next_tick_ = kNever;
    std::uint64_t next_tick_seq_ = 0;
    picoseconds tick_interval_ = 0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventAfter> heap_;

    picoseconds dead_until_ = 0;
    bool recovering_ = false;
    picoseconds last_avalanche_ = 0;

    bool have_pulse_ = false;
    picoseconds last_pulse_ = 0;
    std::uint64_t pulses_in_bin_ = 0;
};

SimResult Simulator::run() {
    cfg_.validate();
    t_end_ = ps_from_seconds(cfg_.duration_s);
    if (t_end_ == 0) throw config_error("duration_s rounds to zero picoseconds");

    thermal_ = ThermalState{cfg_.t_case, cfg_.t_case, 0};
    refresh_voltage_state();
    dark_rate_ = dark_rate(cfg_.spad, de_curve_, thermal_.t_chip, v_over_);
    t_chip_at_dark_ = thermal_.t_chip;
    photon_rate_ = cfg_.photon_rate;

    if (cfg_.mode == QuenchMode::active) {
        dead_time_ = cfg_.active.dead_time();
    } else {
        recovery_tau_ = passive_recovery_tau(cfg_.spad, cfg_.passive);
        will_latch_ = passive_latches(cfg_.spad, cfg_.passive, v_over_);
    }

    schedule_photon(0);
    schedule_dark(0);
    for (const auto& entry : cfg_.photon_schedule)
        push_event(entry.first, EventKind::intensity_change, entry.second);
    if (cfg_.sample_interval_s > 0.0) {
        tick_interval_ = std::max<picoseconds>(1, ps_from_seconds(cfg_.sample_interval_s));
        next_tick_ = tick_interval_;
        next_tick_seq_ = seq_++;
    }

    while (true) {
        picoseconds t = next_photon_;
        std::uint64_t s = next_photon_seq_;
        int which = 0;
        if (next_dark_ < t || (next_dark_ == t && next_dark_seq_ < s)) {
            t = next_dark_;
            s = next_dark_seq_;
            which = 1;
        }
        if (next_tick_ < t || (next_tick_ == t && next_tick_seq_ < s)) {
            t = next_tick_;
            s = next_tick_seq_;
            which = 2;
        }
        if (!heap_.empty()) {
            const Event& top = heap_.top();
            if (top.time < t || (top.time == t && top.seq < s)) {
                t = top.time;
                which = 3;
            }
        }
        if (t >= t_end_) break;

        switch (which) {
            case 0: {
                ++result_.n_photons_offered;
                schedule_photon(t);
                const double de = thinning_efficiency();
                if (de >= 1.0 || (de > 0.0 && streams_.thinning.next_unit() < de))
                    process_carrier(t, CarrierOrigin::photon);
                break;
            }
            case 1: {
                maybe_refresh_dark_rate();
                schedule_dark(t);
                process_carrier(t, CarrierOrigin::dark);
                break;
            }
            case 2: {
                if (cfg_.thermal_feedback) advance_thermal(t);
                result_.samples.push_back(SampleRecord{t, pulses_in_bin_, thermal_.t_chip});
                pulses_in_bin_ = 0;
                next_tick_ = t + tick_interval_;
                next_tick_seq_ = seq_++;
                break;
            }
            case 3: {
                const Event e = heap_.top();
                heap_.pop();
                if (e.kind == EventKind::trap_release) {
                    process_carrier(e.time, CarrierOrigin::trap);
                } else {
                    photon_rate_ = e.value;
                    schedule_photon(e.time);
                }
                break;
            }
        }
    }

    if (cfg_.thermal_feedback) advance_thermal(t_end_);
    if (next_tick_ == t_end_ && tick_interval_ > 0)
        result_.samples.push_back(SampleRecord{t_end_, pulses_in_bin_, thermal_.t_chip});
    result_.final_t_chip = thermal_.t_chip;
    return result_;
}

}  // namespace

SimResult run_simulation(const SimConfig& config) { return Simulator(config).run(); }

}  // namespace spadsim
