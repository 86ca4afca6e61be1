#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "credhedge/cli.hpp"

namespace {

using namespace credhedge;

std::string settings_help() {
    std::string out = "\nSettings (config file lines or --set key=value), with defaults:\n";
    for (const auto& [key, value] : cli::config_keys()) out += "  " + key + " = " + value + "\n";
    out += "\nExit codes: 0 success, 1 input error, 2 numerical failure.\n";
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Dynamic credit hedging: signals, backtests, grid searches and lag analyses"};
    app.footer(settings_help());
    app.require_subcommand(1);
    app.set_version_flag("--version", cli::kToolVersion);

    std::string config_file;
    std::string data_dir = ".";
    std::string out_dir = ".";
    std::uint64_t seed = 7;
    std::vector<std::string> overrides;
    app.add_option("--config", config_file, "Flat key=value configuration file");
    app.add_option("--data-dir", data_dir, "Directory holding the input CSV bundle")->capture_default_str();
    app.add_option("--out-dir", out_dir, "Directory receiving the outputs")->capture_default_str();
    app.add_option("--seed", seed, "Seed for the synthetic generator")->capture_default_str();
    app.add_option("--set", overrides, "Override one setting, key=value (repeatable)");

    auto* signals = app.add_subcommand("signals", "Build the daily signals and the orthogonality report");
    auto* backtest = app.add_subcommand("backtest", "Run one hedged backtest and summarize it");
    auto* gridsearch = app.add_subcommand("gridsearch", "Staged search over lookback and thresholds");
    auto* lags = app.add_subcommand("lags", "Backtests with delayed or advanced execution");
    auto* synth = app.add_subcommand("synth", "Write a synthetic market data bundle");
    for (auto* sub : {signals, backtest, gridsearch, lags, synth}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        cli::RunConfig config;
        config.data_dir = data_dir;
        config.out_dir = out_dir;
        config.seed = seed;
        if (!config_file.empty()) {
            config.config_file = config_file;
            for (const auto& [key, value] : cli::read_config_file(config_file)) {
                if (key == "seed") {
                    config.seed = std::stoull(value);
                } else {
                    cli::apply_setting(config, key, value);
                }
            }
            if (app.count("--seed")) config.seed = seed;
        }
        for (const auto& o : overrides) cli::apply_override(config, o);

        cli::CommandReport report;
        if (*signals) report = cli::cmd_signals(config);
        else if (*backtest) report = cli::cmd_backtest(config);
        else if (*gridsearch) report = cli::cmd_gridsearch(config);
        else if (*lags) report = cli::cmd_lags(config);
        else report = cli::cmd_synth(config);

        for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& p : report.outputs) std::cout << "wrote " << p.string() << '\n';
        std::cout << "manifest_sha256=" << report.manifest_hash << '\n';
        return 0;
    } catch (const DataError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
