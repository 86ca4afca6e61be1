#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "credhedge/backtest.hpp"
#include "credhedge/metrics.hpp"
#include "credhedge/synth.hpp"

namespace credhedge::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Every setting a subcommand can use, resolved from defaults, the config
/// file and `--set` overrides (in that order).
struct RunConfig {
    std::filesystem::path config_file;
    std::filesystem::path data_dir = ".";
    std::filesystem::path out_dir = ".";
    std::uint64_t seed = 7;

    SignalConfig signals;
    BacktestConfig backtest;
    GridSpecification grid;
    std::vector<int> lags{-5, -2, 0, 2, 5, 10};

    std::string synth_regime = "planted";  // "planted" or "calm"
    int synth_days = 1500;
};

/// Documented keys with their default values, in display order.
std::vector<std::pair<std::string, std::string>> config_keys();

/// Parses `key = value` lines; '#' starts a comment. Throws DataError on
/// malformed lines or duplicate keys.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Throws DataError for unknown keys or unparsable values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// "key=value" form used by --set.
void apply_override(RunConfig& config, const std::string& assignment);

/// Resolved settings as sorted key=value lines.
std::string describe(const RunConfig& config);

struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::filesystem::path config_file;
    std::uint64_t seed = 0;
    std::string resolved_config;
    std::map<std::string, std::string> input_hashes;  // file name -> SHA-256 hex

    /// SHA-256 over a canonical rendering of every field.
    std::string hash() const;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

RunManifest make_manifest(const std::string& command, const RunConfig& config);

/// Outcome of a subcommand: files written and warnings raised.
struct CommandReport {
    std::vector<std::filesystem::path> outputs;
    std::vector<std::string> warnings;
    std::string manifest_hash;
};

CommandReport cmd_signals(const RunConfig& config);
CommandReport cmd_backtest(const RunConfig& config);
CommandReport cmd_gridsearch(const RunConfig& config);
CommandReport cmd_lags(const RunConfig& config);
CommandReport cmd_synth(const RunConfig& config);

}  // namespace credhedge::cli
