#include "spadsim/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "spadsim/errors.hpp"

namespace spadsim {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_line(int line, const std::string& message) {
    throw config_error("config line " + std::to_string(line) + ": " + message);
}

double parse_number(const std::string& token, int line, const std::string& key) {
    const std::string t = trim(token);
    double value = 0.0;
    const char* begin = t.data();
    const char* end = begin + t.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        fail_line(line, key + " expects a number, got '" + t + "'");
    return value;
}

std::uint64_t parse_u64(const std::string& token, int line, const std::string& key) {
    const std::string t = trim(token);
    std::uint64_t value = 0;
    const char* begin = t.data();
    const char* end = begin + t.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        fail_line(line, key + " expects a non-negative integer, got '" + t + "'");
    return value;
}

std::vector<double> parse_numbers(const std::string& token, int line, const std::string& key) {
    std::vector<double> values;
    std::string rest = token;
    while (true) {
        const auto comma = rest.find(',');
        values.push_back(parse_number(rest.substr(0, comma), line, key));
        if (comma == std::string::npos) break;
        rest = rest.substr(comma + 1);
    }
    return values;
}

// Shortest decimal digits that round-trip exactly.
std::string shortest(double value) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

bool apply_spad(SpadParams& p, const std::string& key, const std::string& value, int line) {
    const auto num = [&] { return parse_number(value, line, key); };
    if (key == "v_br_ref") p.v_br_ref = num();
    else if (key == "t_ref") p.t_ref = num();
    else if (key == "tempco") p.tempco = num();
    else if (key == "c_spad") p.c_spad = num();
    else if (key == "i_latch") p.i_latch = num();
    else if (key == "de_anchor_v_lo") p.de_anchor_lo.v_over = num();
    else if (key == "de_anchor_p_lo") p.de_anchor_lo.probability = num();
    else if (key == "de_anchor_v_hi") p.de_anchor_hi.v_over = num();
    else if (key == "de_anchor_p_hi") p.de_anchor_hi.probability = num();
    else if (key == "dark_rate_ref") p.dark_rate_ref = num();
    else if (key == "t_dark_ref") p.t_dark_ref = num();
    else if (key == "v_over_ref") p.v_over_ref = num();
    else if (key == "t_double") p.t_double = num();
    else if (key == "dark_floor") p.dark_floor = num();
    else if (key == "ap_p0") p.ap_p0 = num();
    else if (key == "ap_knee") p.ap_knee = num();
    else if (key == "ap_slope") p.ap_slope = num();
    else if (key == "ap_tau") p.ap_tau = num();
    else if (key == "r_th") p.r_th = num();
    else if (key == "tau_th") p.tau_th = num();
    else if (key == "e_avalanche") p.e_avalanche = num();
    else return false;
    return true;
}

bool apply_quench(ActiveQuenchParams& a, PassiveQuenchParams& q, const std::string& key,
                  const std::string& value, int line) {
    if (key == "t_sense_ps") a.t_sense = parse_u64(value, line, key);
    else if (key == "t_quench_ps") a.t_quench = parse_u64(value, line, key);
    else if (key == "t_recover_ps") a.t_recover = parse_u64(value, line, key);
    else if (key == "v_over_max") a.v_over_max = parse_number(value, line, key);
    else if (key == "r_s") q.r_s = parse_number(value, line, key);
    else if (key == "r_l") q.r_l = parse_number(value, line, key);
    else if (key == "rearm_fraction") q.rearm_fraction = parse_number(value, line, key);
    else return false;
    return true;
}

bool apply_led(LedParams& p, const std::string& key, const std::string& value, int line) {
    if (key == "loglog_coeffs") p.loglog_coeffs = parse_numbers(value, line, key);
    else if (key == "current_lo") p.current_lo = parse_number(value, line, key);
    else if (key == "current_hi") p.current_hi = parse_number(value, line, key);
    else if (key == "t_cal") p.t_cal = parse_number(value, line, key);
    else if (key == "tempco_rel") p.tempco_rel = parse_number(value, line, key);
    else return false;
    return true;
}

bool apply_scenario(ScenarioConfig& c, const std::string& key, const std::string& value,
                    int line) {
    if (key == "v_bias") c.v_bias = parse_number(value, line, key);
    else if (key == "t_case") c.t_case = parse_number(value, line, key);
    else if (key == "v_over_max") c.v_over_max = parse_number(value, line, key);
    else if (key == "duration_scale") c.duration_scale = parse_number(value, line, key);
    else if (key == "seed") c.seed = parse_u64(value, line, key);
    else if (key == "workers") {
        const auto w = parse_u64(value, line, key);
        if (w > 1024) fail_line(line, "workers out of range");
        c.workers = static_cast<int>(w);
    } else return false;
    return true;
}

}  // namespace

void ScenarioConfig::validate() const {
    spad.validate();
    active.validate();
    passive.validate();
    led.validate();
    if (!(v_bias >= 0.0)) throw config_error("v_bias must be non-negative");
    if (!(v_over_max > 0.0)) throw config_error("v_over_max must be positive");
    if (!(duration_scale > 0.0)) throw config_error("duration_scale must be positive");
    if (workers < 1) throw config_error("workers must be at least 1");
}

ScenarioConfig parse_config(const std::string& text) {
    ScenarioConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail_line(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "spad" && section != "quench" && section != "led" &&
                section != "scenario")
                fail_line(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_line(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail_line(line_no, "missing key before '='");
        if (value.empty()) fail_line(line_no, "missing value for " + key);
        if (section.empty()) fail_line(line_no, "key " + key + " outside any section");

        bool known = false;
        if (section == "spad") known = apply_spad(cfg.spad, key, value, line_no);
        else if (section == "quench")
            known = apply_quench(cfg.active, cfg.passive, key, value, line_no);
        else if (section == "led") known = apply_led(cfg.led, key, value, line_no);
        else known = apply_scenario(cfg, key, value, line_no);
        if (!known)
            fail_line(line_no, "unknown key " + section + "." + key);
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ScenarioConfig& c) {
    std::ostringstream out;
    out << "[spad]\n";
    out << "v_br_ref = " << shortest(c.spad.v_br_ref) << "\n";
    out << "t_ref = " << shortest(c.spad.t_ref) << "\n";
    out << "tempco = " << shortest(c.spad.tempco) << "\n";
    out << "c_spad = " << shortest(c.spad.c_spad) << "\n";
    out << "i_latch = " << shortest(c.spad.i_latch) << "\n";
    out << "de_anchor_v_lo = " << shortest(c.spad.de_anchor_lo.v_over) << "\n";
    out << "de_anchor_p_lo = " << shortest(c.spad.de_anchor_lo.probability) << "\n";
    out << "de_anchor_v_hi = " << shortest(c.spad.de_anchor_hi.v_over) << "\n";
    out << "de_anchor_p_hi = " << shortest(c.spad.de_anchor_hi.probability) << "\n";
    out << "dark_rate_ref = " << shortest(c.spad.dark_rate_ref) << "\n";
    out << "t_dark_ref = " << shortest(c.spad.t_dark_ref) << "\n";
    out << "v_over_ref = " << shortest(c.spad.v_over_ref) << "\n";
    out << "t_double = " << shortest(c.spad.t_double) << "\n";
    out << "dark_floor = " << shortest(c.spad.dark_floor) << "\n";
    out << "ap_p0 = " << shortest(c.spad.ap_p0) << "\n";
    out << "ap_knee = " << shortest(c.spad.ap_knee) << "\n";
    out << "ap_slope = " << shortest(c.spad.ap_slope) << "\n";
    out << "ap_tau = " << shortest(c.spad.ap_tau) << "\n";
    out << "r_th = " << shortest(c.spad.r_th) << "\n";
    out << "tau_th = " << shortest(c.spad.tau_th) << "\n";
    out << "e_avalanche = " << shortest(c.spad.e_avalanche) << "\n";
    out << "\n[quench]\n";
    out << "t_sense_ps = " << c.active.t_sense << "\n";
    out << "t_quench_ps = " << c.active.t_quench << "\n";
    out << "t_recover_ps = " << c.active.t_recover << "\n";
    out << "v_over_max = " << shortest(c.active.v_over_max) << "\n";
    out << "r_s = " << shortest(c.passive.r_s) << "\n";
    out << "r_l = " << shortest(c.passive.r_l) << "\n";
    out << "rearm_fraction = " << shortest(c.passive.rearm_fraction) << "\n";
    out << "\n[led]\n";
    out << "loglog_coeffs = ";
    for (std::size_t i = 0; i < c.led.loglog_coeffs.size(); ++i) {
        if (i) out << ", ";
        out << shortest(c.led.loglog_coeffs[i]);
    }
    out << "\n";
    out << "current_lo = " << shortest(c.led.current_lo) << "\n";
    out << "current_hi = " << shortest(c.led.current_hi) << "\n";
    out << "t_cal = " << shortest(c.led.t_cal) << "\n";
    out << "tempco_rel = " << shortest(c.led.tempco_rel) << "\n";
    out << "\n[scenario]\n";
    out << "v_bias = " << shortest(c.v_bias) << "\n";
    out << "t_case = " << shortest(c.t_case) << "\n";
    out << "v_over_max = " << shortest(c.v_over_max) << "\n";
    out << "duration_scale = " << shortest(c.duration_scale) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "workers = " << c.workers << "\n";
    return out.str();
}

}  // namespace spadsim
