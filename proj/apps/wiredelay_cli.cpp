// Command-line driver: configuration-driven experiment runs with a strict
// exit-code contract so CI can gate on results.
//
//   wiredelay run <config.json> [--seed S] [--out DIR] [--workers K]
//   wiredelay list [--json]
//
// Exit codes: 0 all asserted tolerances hold, 1 at least one failed,
// 2 configuration problem (file, schema, or flags), 3 numerical abort.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wiredelay/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitToleranceFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalAbort = 3;

struct RunOptions {
    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
    int workers = 1;
};

int do_run(const RunOptions& opts) {
    wiredelay::ExperimentConfig config;
    try {
        config = wiredelay::parse_experiment_config(wiredelay::load_json_file(opts.config_path));
    } catch (const wiredelay::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    if (opts.has_seed_override) config.master_seed = opts.seed_override;
    if (!opts.out_override.empty()) config.output.directory = opts.out_override;

    try {
        const wiredelay::RunOutcome outcome = wiredelay::run_experiment(config, opts.workers);
        for (const auto& check : outcome.summary.at("checks"))
            std::cout << (check.at("pass").get<bool>() ? "PASS  " : "FAIL  ")
                      << check.at("name").get<std::string>()
                      << "  (value " << check.at("value").dump() << ", bound "
                      << check.at("bound").dump() << ")\n";
        for (const auto& file : outcome.files) std::cout << "wrote " << file << "\n";
        return outcome.tolerance_failure ? kExitToleranceFailure : kExitOk;
    } catch (const wiredelay::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        // Invalid parameter combinations surface from the library as
        // invalid_argument; they are configuration problems, not numerics.
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const wiredelay::NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitNumericalAbort;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-matrix simulation toolkit for multichannel disordered wires"};
    app.require_subcommand(1);

    RunOptions opts;
    CLI::App* run = app.add_subcommand("run", "Run one experiment from a JSON config file");
    run->add_option("config", opts.config_path, "Path to the experiment config (JSON)")
        ->required();
    CLI::Option* seed_opt =
        run->add_option("--seed", opts.seed_override, "Override sim.master_seed");
    run->add_option("--out", opts.out_override, "Override output.directory");
    run->add_option("--workers", opts.workers, "Worker threads (never affects results)")
        ->check(CLI::PositiveNumber);

    bool list_as_json = false;
    CLI::App* list = app.add_subcommand("list", "List the available experiments");
    list->add_flag("--json", list_as_json, "Emit the listing as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    if (list->parsed()) {
        if (list_as_json)
            std::cout << wiredelay::list_experiments_json().dump(2) << "\n";
        else
            std::cout << wiredelay::list_experiments_text();
        return kExitOk;
    }
    opts.has_seed_override = seed_opt->count() > 0;
    return do_run(opts);
}
