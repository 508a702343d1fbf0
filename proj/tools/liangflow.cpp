// liangflow command-line front end.
//
//   liangflow run <config> [--out PATH] [--workers N] [--seedless]
//   liangflow critical-field --kappa X
//   liangflow validate <config>
//
// Exit codes: 0 success, 2 config error, 3 engine error, 4 resource guard.

#include <iostream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "liangflow/config.hpp"
#include "liangflow/error.hpp"
#include "liangflow/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitEngine = 3;
constexpr int kExitResource = 4;

std::size_t point_count(const liangflow::SweepConfig& c) {
    using liangflow::Experiment;
    if (c.experiment == Experiment::AahHeatmap || c.experiment == Experiment::AahCrosscut)
        return c.lambdas.size();
    return c.fields.size() * c.kappas.size();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Liang information flow across spin-chain phase transitions"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int workers = -1;
    bool seedless = false;
    auto* run = app.add_subcommand("run", "Run an experiment and write its CSV");
    run->add_option("config", config_path, "Configuration file")->required();
    run->add_option("--out", out_path, "Output CSV (overrides the config's output key)");
    run->add_option("--workers", workers, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    run->add_flag("--seedless", seedless, "Accepted for compatibility; no computation uses randomness");

    double kappa = 0.0;
    auto* crit = app.add_subcommand("critical-field", "Transverse field on the ANNNI critical line");
    crit->add_option("--kappa", kappa, "Next-nearest-neighbour coupling in [0, 0.5)")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and check a configuration file");
    validate->add_option("config", validate_path, "Configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*crit) {
            std::cout << liangflow::format_number(liangflow::critical_field(kappa)) << '\n';
            return 0;
        }
        if (*validate) {
            const auto c = liangflow::load_config(validate_path);
            std::cout << "ok: " << liangflow::experiment_name(c.experiment) << ", L=" << c.length << ", "
                      << point_count(c) << " parameter points\n";
            return 0;
        }

        auto c = liangflow::load_config(config_path);
        if (workers >= 0)
            c.workers = workers;
        if (!out_path.empty())
            c.output = out_path;
        const auto table = liangflow::run_experiment(c);
        if (c.output.empty() || c.output == "-")
            liangflow::write_csv(table, std::cout);
        else
            liangflow::emit_csv(table, c.output);
        return 0;
    } catch (const liangflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::out_of_range& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const liangflow::ResourceError& e) {
        std::cerr << "resource guard: " << e.what() << '\n';
        return kExitResource;
    } catch (const std::bad_alloc&) {
        std::cerr << "resource guard: out of memory\n";
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "engine error: " << e.what() << '\n';
        return kExitEngine;
    }
}
