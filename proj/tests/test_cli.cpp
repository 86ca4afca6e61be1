#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "credhedge/cli.hpp"
#include "support.hpp"

using namespace credhedge;
using credhedge::testing::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream s(line);
    for (std::string f; std::getline(s, f, ',');) out.push_back(f);
    return out;
}

cli::RunConfig small_run(const std::filesystem::path& data, const std::filesystem::path& out) {
    cli::RunConfig c;
    c.data_dir = data;
    c.out_dir = out;
    c.seed = 13;
    for (const auto& s : {"synth_regime=calm", "synth_days=400", "momentum_days=40", "momentum_offset=5",
                          "volatility_days=60", "volume_sma_days=60", "lookback=40", "gamma_upper=1.0",
                          "gamma_lower=-1.0"}) {
        cli::apply_override(c, s);
    }
    return c;
}

/// Writes a synthetic bundle once per test and returns its directory.
std::filesystem::path make_bundle(const TempDir& dir) {
    const auto data = dir.path() / "data";
    std::filesystem::create_directories(data);
    cli::cmd_synth(small_run(data, data));
    return data;
}

}  // namespace

TEST(Config, FileParsingHandlesCommentsAndBlanks) {
    TempDir dir;
    const auto path = dir.write("run.cfg", "# header\n\nlookback = 60   # trailing\n  gamma_upper=3.0\nfund=F\n");
    const auto kv = cli::read_config_file(path);
    ASSERT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv.at("lookback"), "60");
    EXPECT_EQ(kv.at("gamma_upper"), "3.0");
    EXPECT_EQ(kv.at("fund"), "F");
}

TEST(Config, FileErrors) {
    TempDir dir;
    EXPECT_THROW(cli::read_config_file(dir.write("dup.cfg", "lookback=1\nlookback=2\n")), DataError);
    EXPECT_THROW(cli::read_config_file(dir.write("bad.cfg", "lookback\n")), DataError);
    EXPECT_THROW(cli::read_config_file(dir.path() / "missing.cfg"), DataError);
}

TEST(Config, OverridesApplyAndValidate) {
    cli::RunConfig c;
    cli::apply_override(c, "lookback = 125");
    cli::apply_override(c, "gamma_upper=inf");
    cli::apply_override(c, "hedges=LQD,HYG");
    cli::apply_override(c, "lags=0,3");
    cli::apply_override(c, "cost_mode=position_spread");
    cli::apply_override(c, "funding_mode=per_mille");
    EXPECT_EQ(c.backtest.lookback, 125);
    EXPECT_TRUE(std::isinf(c.backtest.gamma_upper));
    EXPECT_EQ(c.backtest.hedges, (std::vector<std::string>{"LQD", "HYG"}));
    EXPECT_EQ(c.lags, (std::vector<int>{0, 3}));
    EXPECT_EQ(c.backtest.cost_mode, CostMode::PositionSpread);
    EXPECT_EQ(c.backtest.funding_mode, FundingMode::PerMille);
    EXPECT_NE(cli::describe(c).find("lookback=125\n"), std::string::npos);

    EXPECT_THROW(cli::apply_override(c, "no_such_key=1"), DataError);
    EXPECT_THROW(cli::apply_override(c, "lookback"), DataError);
    EXPECT_THROW(cli::apply_override(c, "lookback=forty"), DataError);
    EXPECT_THROW(cli::apply_override(c, "model=svm"), DataError);
}

TEST(Config, EveryDocumentedKeyRoundTrips) {
    const auto keys = cli::config_keys();
    EXPECT_GE(keys.size(), 30u);
    cli::RunConfig c;
    for (const auto& [key, value] : keys) EXPECT_NO_THROW(cli::apply_setting(c, key, value)) << key;
    EXPECT_EQ(cli::describe(c), cli::describe(cli::RunConfig{}));
}

TEST(Manifest, HashIsStableAndSensitive) {
    EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    cli::RunConfig c;
    const auto a = cli::make_manifest("synth", c).hash();
    EXPECT_EQ(a, cli::make_manifest("synth", c).hash());
    c.seed = 8;
    EXPECT_NE(a, cli::make_manifest("synth", c).hash());
}

TEST(Commands, SignalsWithAndWithoutSmiles) {
    TempDir dir;
    const auto data = make_bundle(dir);
    const auto out = dir.path() / "out";
    auto report = cli::cmd_signals(small_run(data, out));
    EXPECT_TRUE(report.warnings.empty());
    auto rows = lines_of(out / "signals.csv");
    ASSERT_GT(rows.size(), 2u);
    EXPECT_EQ(rows[0], "# manifest_sha256=" + report.manifest_hash);
    EXPECT_EQ(rows[1], "date,name,value");
    EXPECT_NE(slurp(out / "signals.csv").find(",Credit,"), std::string::npos);
    const auto ortho = nlohmann::json::parse(slurp(out / "orthogonality.json"));
    EXPECT_EQ(ortho["names"].size(), 4u);

    std::filesystem::remove(data / "smiles.csv");
    const auto out2 = dir.path() / "out2";
    report = cli::cmd_signals(small_run(data, out2));
    ASSERT_FALSE(report.warnings.empty());
    EXPECT_NE(report.warnings[0].find("Credit"), std::string::npos);
    const auto text = slurp(out2 / "signals.csv");
    EXPECT_EQ(text.find(",Credit,"), std::string::npos);
    EXPECT_NE(text.find(",Liquidity,"), std::string::npos);
    EXPECT_NE(text.find(",Momentum,"), std::string::npos);
}

TEST(Commands, EmptyDataDirectoryFailsWithoutOutputs) {
    TempDir dir;
    const auto data = dir.path() / "empty";
    const auto out = dir.path() / "out";
    std::filesystem::create_directories(data);
    EXPECT_THROW(cli::cmd_backtest(small_run(data, out)), DataError);
    EXPECT_THROW(cli::cmd_signals(small_run(data, out)), DataError);
    EXPECT_THROW(cli::cmd_lags(small_run(dir.path() / "absent", out)), DataError);
    EXPECT_FALSE(std::filesystem::exists(out) && !std::filesystem::is_empty(out));
}

TEST(Commands, SameManifestGivesIdenticalOutputs) {
    TempDir dir;
    const auto data = make_bundle(dir);
    const auto a = cli::cmd_backtest(small_run(data, dir.path() / "a"));
    const auto b = cli::cmd_backtest(small_run(data, dir.path() / "b"));
    EXPECT_EQ(a.manifest_hash, b.manifest_hash);
    for (const auto* name : {"backtest.csv", "model_diagnostics.csv", "summary.json", "manifest.json"}) {
        EXPECT_EQ(slurp(dir.path() / "a" / name), slurp(dir.path() / "b" / name)) << name;
    }

    const auto again = dir.path() / "data2";
    std::filesystem::create_directories(again);
    cli::cmd_synth(small_run(again, again));
    for (const auto* name : {"prices.csv", "smiles.csv", "trades.csv", "treasuries.csv", "fund_returns.csv"}) {
        EXPECT_EQ(slurp(data / name), slurp(again / name)) << name;
    }
}

TEST(Commands, InfiniteEntryThresholdMatchesBaseline) {
    TempDir dir;
    const auto data = make_bundle(dir);
    auto cfg = small_run(data, dir.path() / "out");
    cli::apply_override(cfg, "gamma_upper=inf");
    cli::cmd_backtest(cfg);
    const auto j = nlohmann::json::parse(slurp(dir.path() / "out" / "summary.json"));
    EXPECT_EQ(j["delta"]["d_sortino"].get<double>(), 0.0);
    EXPECT_EQ(j["delta"]["d_max_drawdown"].get<double>(), 0.0);
    EXPECT_EQ(j["hedged"]["annual_turnover"].get<double>(), 0.0);
}

TEST(Commands, ZeroLagRowMatchesBacktestSummary) {
    TempDir dir;
    const auto data = make_bundle(dir);
    auto cfg = small_run(data, dir.path() / "out");
    cli::apply_override(cfg, "lags=0,5");
    cli::cmd_backtest(cfg);
    cli::cmd_lags(cfg);
    const auto j = nlohmann::json::parse(slurp(dir.path() / "out" / "summary.json"));
    const auto rows = lines_of(dir.path() / "out" / "lags.csv");
    std::vector<std::string> zero;
    for (const auto& r : rows) {
        if (r.rfind("0,", 0) == 0) zero = fields(r);
    }
    ASSERT_EQ(zero.size(), 8u);
    EXPECT_EQ(std::stod(zero[1]), j["hedged"]["annual_return"].get<double>());
    EXPECT_EQ(std::stod(zero[4]), j["hedged"]["max_drawdown"].get<double>());
    EXPECT_EQ(std::stod(zero[6]), j["hedged"]["annual_turnover"].get<double>());
    EXPECT_EQ(std::stod(zero[7]), j["delta"]["d_sortino"].get<double>());
}

TEST(Commands, GridsearchReportsSelection) {
    TempDir dir;
    const auto data = make_bundle(dir);
    auto cfg = small_run(data, dir.path() / "out");
    cli::apply_override(cfg, "grid_lookbacks=30,40");
    cli::apply_override(cfg, "grid_gamma_uppers=1.0,2.0");
    cli::apply_override(cfg, "grid_gamma_lowers=-1.0");
    const auto report = cli::cmd_gridsearch(cfg);
    const auto text = slurp(dir.path() / "out" / "gridsearch.csv");
    EXPECT_NE(text.find("# manifest_sha256=" + report.manifest_hash), std::string::npos);
    EXPECT_NE(text.find("selected lookback="), std::string::npos);
}
