#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spadsim/config.hpp"
#include "spadsim/csv.hpp"
#include "spadsim/errors.hpp"
#include "spadsim/scenario.hpp"

namespace {

spadsim::ScenarioConfig resolve_config(const std::string& path) {
    if (path.empty()) {
        spadsim::ScenarioConfig config;
        config.validate();
        return config;
    }
    return spadsim::load_config(path);
}

void write_meta(const std::string& path, const std::string& scenario,
                const spadsim::ScenarioConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw spadsim::sim_error("cannot write " + path);
    out << "version = " << spadsim::kVersion << "\n";
    out << "scenario = " << scenario << "\n\n";
    out << spadsim::serialize_config(config);
    if (!out.flush()) throw spadsim::sim_error("write failed: " + path);
}

int run_command(const std::string& name, const std::string& config_path,
                const std::string& out_dir, bool seed_set, std::uint64_t seed,
                bool workers_set, int workers) {
    spadsim::ScenarioConfig config = resolve_config(config_path);
    if (seed_set) config.seed = seed;
    if (workers_set) config.workers = workers;
    config.validate();
    if (!spadsim::scenario_exists(name))
        throw spadsim::config_error("unknown scenario: " + name +
                                    " (see `spadsim list`)");

    std::filesystem::create_directories(out_dir);
    const spadsim::ScenarioResult result = spadsim::run_scenario(name, config);

    const std::string table_path = out_dir + "/" + name + ".csv";
    spadsim::write_csv_file(result.table, table_path);
    std::cout << "wrote " << table_path << " (" << result.table.rows.size()
              << " rows)\n";
    if (result.aux) {
        const std::string aux_path =
            out_dir + "/" + name + "_" + result.aux_name + ".csv";
        spadsim::write_csv_file(*result.aux, aux_path);
        std::cout << "wrote " << aux_path << " (" << result.aux->rows.size()
                  << " rows)\n";
    }
    write_meta(out_dir + "/run.meta", name, config);
    std::cout << "wrote " << out_dir << "/run.meta\n";
    for (const auto& [key, value] : result.stats)
        std::cout << key << " = " << spadsim::format_double(value) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SPAD detector simulator: discrete-event runs of an actively or "
                 "passively quenched single-photon detector, packaged as named "
                 "measurement scenarios with CSV output"};
    app.require_subcommand(1);

    std::string scenario_name;
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int workers = 1;

    auto* run = app.add_subcommand("run", "run one scenario and write its tables");
    run->add_option("scenario", scenario_name, "scenario name, see `spadsim list`")
        ->required();
    run->add_option("--config", config_path, "configuration file");
    auto* seed_opt = run->add_option("--seed", seed, "override the configured seed");
    run->add_option("--out", out_dir, "output directory (default: current)");
    auto* workers_opt =
        run->add_option("--workers", workers, "override the worker thread count");

    auto* list = app.add_subcommand("list", "print the available scenarios");

    auto* validate =
        app.add_subcommand("validate", "parse a configuration and echo it resolved");
    validate->add_option("--config", config_path, "configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (list->parsed()) {
            for (const auto& info : spadsim::scenario_list())
                std::cout << info.name << "\n    " << info.description << "\n";
            return 0;
        }
        if (validate->parsed()) {
            const spadsim::ScenarioConfig config = resolve_config(config_path);
            std::cout << spadsim::serialize_config(config);
            return 0;
        }
        return run_command(scenario_name, config_path, out_dir, seed_opt->count() > 0,
                           seed, workers_opt->count() > 0, workers);
    } catch (const spadsim::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const spadsim::sim_error& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
