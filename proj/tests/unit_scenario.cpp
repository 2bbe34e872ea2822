#include <doctest.h>

#include <set>
#include <string>

#include "spadsim/csv.hpp"
#include "spadsim/errors.hpp"
#include "spadsim/scenario.hpp"

using namespace spadsim;

namespace {

double stat_value(const ScenarioResult& r, const std::string& name) {
    for (const auto& [key, value] : r.stats)
        if (key == name) return value;
    FAIL("missing stat " << name);
    return 0.0;
}

}  // namespace

TEST_CASE("the scenario catalog is complete and well formed") {
    const auto& list = scenario_list();
    CHECK(list.size() == 10);
    std::set<std::string> names;
    for (const auto& info : list) {
        CHECK(!info.name.empty());
        CHECK(!info.description.empty());
        names.insert(info.name);
        CHECK(scenario_exists(info.name));
    }
    CHECK(names.size() == list.size());
    CHECK(!scenario_exists("nope"));
}

TEST_CASE("unknown scenario names are rejected") {
    ScenarioConfig cfg;
    CHECK_THROWS_WITH_AS((void)run_scenario("nope", cfg), "unknown scenario: nope",
                         config_error);
}

TEST_CASE("invalid configs are rejected before any simulation") {
    ScenarioConfig cfg;
    cfg.workers = 0;
    CHECK_THROWS_AS((void)run_scenario("dark_vs_temp", cfg), config_error);
}

TEST_CASE("bias controller quantizes to the supply grid") {
    const BiasController bias;  // 0..300 V in 10 mV steps
    CHECK(bias.step() == 0.010);
    CHECK(bias.quantize(226.4849) == doctest::Approx(226.48).epsilon(1e-12));
    CHECK(bias.quantize(226.485) == doctest::Approx(226.49).epsilon(1e-12));
    CHECK(bias.quantize(-5.0) == 0.0);
    CHECK(bias.quantize(400.0) == doctest::Approx(300.0).epsilon(1e-12));
    CHECK(bias.index_of(bias.quantize(226.48)) == 22648);
    CHECK(bias.at_index(22648) == doctest::Approx(226.48).epsilon(1e-12));

    const BiasController fine(200.0, 250.0, 0.005);
    CHECK(fine.quantize(226.4849) == doctest::Approx(226.485).epsilon(1e-12));
    CHECK(fine.quantize(0.0) == doctest::Approx(200.0).epsilon(1e-12));

    CHECK_THROWS_AS(BiasController(0.0, 300.0, 0.0), config_error);
    CHECK_THROWS_AS(BiasController(-1.0, 300.0, 0.01), config_error);
    CHECK_THROWS_AS(BiasController(300.0, 300.0, 0.01), config_error);
}

TEST_CASE("breakdown search finds the first supply step with dark counts") {
    // Place breakdown at 226.483 V: the 10 mV grid point just above is
    // 226.49, where the dark rate is already ~1e4 Hz against a 100 Hz
    // threshold, while 226.48 sits below breakdown and is silent.
    ScenarioConfig cfg;
    cfg.spad.v_br_ref = 226.483;
    cfg.spad.t_ref = 20.0;
    const BiasController bias;
    const double found = find_breakdown(cfg, 20.0, 100.0, bias, 3);
    CHECK(found == doctest::Approx(226.49).epsilon(1e-9));

    CHECK_THROWS_AS((void)find_breakdown(cfg, 20.0, 0.0, bias, 3), config_error);
}

TEST_CASE("breakdown search reports an unreachable threshold") {
    ScenarioConfig cfg;
    cfg.spad.dark_rate_ref = 0.0;  // no dark generation anywhere in range
    const BiasController bias;
    CHECK_THROWS_AS((void)find_breakdown(cfg, 20.0, 100.0, bias, 4), sim_error);
}

TEST_CASE("scenario output is a pure function of the config") {
    ScenarioConfig cfg;
    const ScenarioResult a = run_scenario("dark_vs_temp", cfg);
    const ScenarioResult b = run_scenario("dark_vs_temp", cfg);
    CHECK(to_csv(a.table) == to_csv(b.table));

    ScenarioConfig threaded = cfg;
    threaded.workers = 3;
    const ScenarioResult c = run_scenario("dark_vs_temp", threaded);
    CHECK(to_csv(a.table) == to_csv(c.table));

    CHECK(stat_value(a, "t_double_fit_k") == stat_value(c, "t_double_fit_k"));
}

TEST_CASE("dark sweep statistics land on the device physics") {
    ScenarioConfig cfg;
    const ScenarioResult r = run_scenario("dark_vs_temp", cfg);
    CHECK(r.table.rows.size() == 11);
    CHECK(stat_value(r, "t_double_fit_k") > 7.0);
    CHECK(stat_value(r, "t_double_fit_k") < 9.0);
    CHECK(stat_value(r, "fit_r2_log") > 0.99);
    CHECK(stat_value(r, "dark_rate_at_t_ref_hz") > 1e4);
    CHECK(stat_value(r, "dark_rate_at_t_ref_hz") < 4e4);
}
