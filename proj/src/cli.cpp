#include "credhedge/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "credhedge/io.hpp"

namespace credhedge::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_number(const std::string& key, const std::string& value) {
    const auto v = lower(value);
    if (v == "inf" || v == "+inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    if (v == "-inf" || v == "-infinity") return -std::numeric_limits<double>::infinity();
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || std::isnan(out)) {
        throw DataError("setting '" + key + "': '" + value + "' is not a number");
    }
    return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
    long long out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) throw DataError("setting '" + key + "': '" + value + "' is not an integer");
    return out;
}

int parse_int(const std::string& key, const std::string& value) {
    const auto v = parse_integer(key, value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw DataError("setting '" + key + "': '" + value + "' is out of range");
    }
    return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    const auto v = lower(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw DataError("setting '" + key + "': '" + value + "' is not a boolean");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& value, F parse) {
    std::vector<T> out;
    for (const auto& item : split_list(value)) out.push_back(parse(key, item));
    if (out.empty()) throw DataError("setting '" + key + "' needs at least one value");
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
    return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& items) {
    std::vector<std::string> parts;
    for (const auto& v : items) {
        if constexpr (std::is_floating_point_v<T>) {
            parts.push_back(io::format_double(v));
        } else {
            parts.push_back(std::to_string(v));
        }
    }
    return join(parts);
}

std::string format_setting(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return io::format_double(v);
}

std::map<std::string, std::string> current_values(const RunConfig& c) {
    const auto& b = c.backtest;
    const auto& s = c.signals;
    std::vector<std::string> names;
    for (auto n : s.names) names.emplace_back(signal_name(n));
    return {
        {"fund", b.fund},
        {"hedges", join(b.hedges)},
        {"model", std::string(model_name(b.model))},
        {"lookback", std::to_string(b.lookback)},
        {"gamma_upper", format_setting(b.gamma_upper)},
        {"gamma_lower", format_setting(b.gamma_lower)},
        {"gamma_ols", format_setting(b.gamma_ols)},
        {"fund_size", format_setting(b.fund_size)},
        {"funding_bps", format_setting(b.funding_bps)},
        {"funding_mode", std::string(funding_mode_name(b.funding_mode))},
        {"cost_mode", std::string(cost_mode_name(b.cost_mode))},
        {"volume_cap", b.volume_cap_enabled ? "true" : "false"},
        {"volume_cap_fraction", format_setting(b.volume_cap_fraction)},
        {"volume_sma_days", std::to_string(b.volume_sma_days)},
        {"volatility_days", std::to_string(b.volatility_days)},
        {"lag", std::to_string(b.lag)},
        {"signals", join(names)},
        {"credit_measure", s.credit_measure == CreditMeasure::ExcessProbability ? "probability" : "drawdown"},
        {"credit_etf", s.credit.credit_etf},
        {"rates_etf", s.credit.rates_etf},
        {"tail_prob", format_setting(s.credit.tail_prob)},
        {"risk_free", format_setting(s.credit.risk_free)},
        {"momentum_source", s.momentum_source},
        {"momentum_days", std::to_string(s.momentum_days)},
        {"momentum_offset", std::to_string(s.momentum_offset)},
        {"liquidity_window_days", std::to_string(s.liquidity.inclusion_window_days)},
        {"max_fill_days", std::to_string(s.liquidity.max_fill_days)},
        {"grid_lookbacks", join_numbers(c.grid.lookbacks)},
        {"grid_gamma_uppers", join_numbers(c.grid.gamma_uppers)},
        {"grid_gamma_lowers", join_numbers(c.grid.gamma_lowers)},
        {"lags", join_numbers(c.lags)},
        {"synth_regime", c.synth_regime},
        {"synth_days", std::to_string(c.synth_days)},
    };
}

const std::vector<std::string>& key_order() {
    static const std::vector<std::string> order{
        "fund", "hedges", "model", "lookback", "gamma_upper", "gamma_lower", "gamma_ols", "fund_size",
        "funding_bps", "funding_mode", "cost_mode", "volume_cap", "volume_cap_fraction", "volume_sma_days",
        "volatility_days", "lag", "signals", "credit_measure", "credit_etf", "rates_etf", "tail_prob", "risk_free",
        "momentum_source", "momentum_days", "momentum_offset", "liquidity_window_days", "max_fill_days",
        "grid_lookbacks", "grid_gamma_uppers", "grid_gamma_lowers", "lags", "synth_regime", "synth_days"};
    return order;
}

MarketDataset load_from(const RunConfig& config) {
    if (!std::filesystem::is_directory(config.data_dir)) {
        throw DataError("data directory '" + config.data_dir.string() + "' does not exist");
    }
    return load_dataset(DatasetPaths::in_directory(config.data_dir));
}

std::string comment_for(const RunManifest& manifest, const std::string& hash) {
    return "manifest_sha256=" + hash + "\ncommand=" + manifest.command + "\ntool_version=" + manifest.tool_version +
           "\nseed=" + std::to_string(manifest.seed);
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    io::AtomicFile file(path);
    file.stream() << j.dump(2) << '\n';
    file.commit();
}

nlohmann::json manifest_json(const RunManifest& m, const std::string& hash) {
    return nlohmann::json{{"manifest_sha256", hash},
                          {"command", m.command},
                          {"tool_version", m.tool_version},
                          {"config_file", m.config_file.string()},
                          {"seed", m.seed},
                          {"resolved_config", m.resolved_config},
                          {"input_hashes", m.input_hashes}};
}

void write_manifest(const RunManifest& m, const std::string& hash, const std::filesystem::path& out_dir,
                    CommandReport& report) {
    const auto path = out_dir / "manifest.json";
    write_json(manifest_json(m, hash), path);
    report.outputs.push_back(path);
}

BacktestInputs inputs_for(const MarketDataset& data, const RunConfig& config) {
    config.backtest.validate();
    return prepare_backtest_inputs(data, config.backtest.fund, config.backtest.hedges, config.signals);
}

void collect_warnings(const std::vector<std::string>& from, std::vector<std::string>& to) {
    for (const auto& w : from) {
        if (std::find(to.begin(), to.end(), w) == to.end()) to.push_back(w);
    }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_keys() {
    const auto values = current_values(RunConfig{});
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : key_order()) out.emplace_back(k, values.at(k));
    return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path.string() + "'");
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        const auto where = path.string() + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw DataError(where + ": expected key = value");
        auto key = trim(std::string_view(text).substr(0, eq));
        auto value = trim(std::string_view(text).substr(eq + 1));
        if (key.empty()) throw DataError(where + ": empty key");
        if (!out.emplace(key, value).second) throw DataError(where + ": duplicate key '" + key + "'");
    }
    return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
    auto& b = c.backtest;
    auto& s = c.signals;
    if (key == "fund") {
        b.fund = value;
    } else if (key == "hedges") {
        b.hedges = split_list(value);
        if (b.hedges.empty()) throw DataError("setting 'hedges' needs at least one instrument");
    } else if (key == "model") {
        const auto v = lower(value);
        if (v == "cca") b.model = ModelKind::Cca;
        else if (v == "ols") b.model = ModelKind::Ols;
        else throw DataError("setting 'model': expected cca or ols, got '" + value + "'");
    } else if (key == "lookback") {
        b.lookback = parse_int(key, value);
    } else if (key == "gamma_upper") {
        b.gamma_upper = parse_number(key, value);
    } else if (key == "gamma_lower") {
        b.gamma_lower = parse_number(key, value);
    } else if (key == "gamma_ols") {
        b.gamma_ols = parse_number(key, value);
    } else if (key == "fund_size") {
        b.fund_size = parse_number(key, value);
    } else if (key == "funding_bps") {
        b.funding_bps = parse_number(key, value);
    } else if (key == "funding_mode") {
        const auto v = lower(value);
        if (v == funding_mode_name(FundingMode::AnnualizedDaily)) b.funding_mode = FundingMode::AnnualizedDaily;
        else if (v == funding_mode_name(FundingMode::PerMille)) b.funding_mode = FundingMode::PerMille;
        else throw DataError("setting 'funding_mode': unknown value '" + value + "'");
    } else if (key == "cost_mode") {
        const auto v = lower(value);
        if (v == cost_mode_name(CostMode::Frictionless)) b.cost_mode = CostMode::Frictionless;
        else if (v == cost_mode_name(CostMode::Full)) b.cost_mode = CostMode::Full;
        else if (v == cost_mode_name(CostMode::PositionSpread)) b.cost_mode = CostMode::PositionSpread;
        else throw DataError("setting 'cost_mode': unknown value '" + value + "'");
    } else if (key == "volume_cap") {
        b.volume_cap_enabled = parse_bool(key, value);
    } else if (key == "volume_cap_fraction") {
        b.volume_cap_fraction = parse_number(key, value);
    } else if (key == "volume_sma_days") {
        b.volume_sma_days = parse_int(key, value);
    } else if (key == "volatility_days") {
        b.volatility_days = parse_int(key, value);
    } else if (key == "lag") {
        b.lag = parse_int(key, value);
    } else if (key == "signals") {
        std::vector<SignalName> names;
        for (const auto& item : split_list(value)) {
            const auto n = parse_signal_name(item);
            if (!n) throw DataError("setting 'signals': unknown signal '" + item + "'");
            names.push_back(*n);
        }
        if (names.empty()) throw DataError("setting 'signals' needs at least one signal");
        s.names = names;
    } else if (key == "credit_measure") {
        const auto v = lower(value);
        if (v == "probability") s.credit_measure = CreditMeasure::ExcessProbability;
        else if (v == "drawdown") s.credit_measure = CreditMeasure::ExcessExpectedDrawdown;
        else throw DataError("setting 'credit_measure': expected probability or drawdown");
    } else if (key == "credit_etf") {
        s.credit.credit_etf = value;
    } else if (key == "rates_etf") {
        s.credit.rates_etf = value;
    } else if (key == "tail_prob") {
        s.credit.tail_prob = parse_number(key, value);
    } else if (key == "risk_free") {
        s.credit.risk_free = parse_number(key, value);
    } else if (key == "momentum_source") {
        s.momentum_source = value;
    } else if (key == "momentum_days") {
        s.momentum_days = parse_int(key, value);
    } else if (key == "momentum_offset") {
        s.momentum_offset = parse_int(key, value);
    } else if (key == "liquidity_window_days") {
        s.liquidity.inclusion_window_days = parse_int(key, value);
    } else if (key == "max_fill_days") {
        s.liquidity.max_fill_days = parse_int(key, value);
        s.credit.max_fill_days = s.liquidity.max_fill_days;
    } else if (key == "grid_lookbacks") {
        c.grid.lookbacks = parse_list<int>(key, value, parse_int);
    } else if (key == "grid_gamma_uppers") {
        c.grid.gamma_uppers = parse_list<double>(key, value, parse_number);
    } else if (key == "grid_gamma_lowers") {
        c.grid.gamma_lowers = parse_list<double>(key, value, parse_number);
    } else if (key == "lags") {
        c.lags = parse_list<int>(key, value, parse_int);
    } else if (key == "synth_regime") {
        const auto v = lower(value);
        if (v != "planted" && v != "calm") throw DataError("setting 'synth_regime': expected planted or calm");
        c.synth_regime = v;
    } else if (key == "synth_days") {
        c.synth_days = parse_int(key, value);
    } else {
        throw DataError("unknown setting '" + key + "'");
    }
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw DataError("--set expects key=value, got '" + assignment + "'");
    apply_setting(config, trim(std::string_view(assignment).substr(0, eq)),
                  trim(std::string_view(assignment).substr(eq + 1)));
}

std::string describe(const RunConfig& config) {
    std::string out;
    for (const auto& [k, v] : current_values(config)) out += k + "=" + v + "\n";
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("SHA-256 digest failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return sha256_hex(buffer.str());
}

std::string RunManifest::hash() const {
    std::string canonical = "command=" + command + "\ntool_version=" + tool_version +
                            "\nconfig_file=" + config_file.string() + "\nseed=" + std::to_string(seed) +
                            "\n[config]\n" + resolved_config + "[inputs]\n";
    for (const auto& [name, h] : input_hashes) canonical += name + "=" + h + "\n";
    return sha256_hex(canonical);
}

RunManifest make_manifest(const std::string& command, const RunConfig& config) {
    RunManifest m;
    m.command = command;
    m.config_file = config.config_file;
    m.seed = config.seed;
    m.resolved_config = describe(config);
    if (command != "synth") {
        const auto paths = DatasetPaths::in_directory(config.data_dir);
        for (const auto& p : {paths.prices, paths.smiles, paths.trades, paths.treasuries, paths.fund_returns,
                              paths.roster}) {
            if (!p.empty()) m.input_hashes[p.filename().string()] = sha256_file(p);
        }
    }
    return m;
}

CommandReport cmd_signals(const RunConfig& config) {
    const auto manifest = make_manifest("signals", config);
    const auto hash = manifest.hash();
    const auto data = load_from(config);

    CommandReport report;
    report.manifest_hash = hash;
    const std::string momentum_source =
        config.signals.momentum_source.empty() ? config.backtest.hedges.front() : config.signals.momentum_source;

    std::vector<SignalSeries> built;
    for (auto name : {SignalName::Liquidity, SignalName::Momentum, SignalName::Credit}) {
        try {
            built.push_back(build_signal(data, name, config.signals, momentum_source));
        } catch (const DataError& e) {
            report.warnings.push_back("signal " + std::string(signal_name(name)) + " skipped: " + e.what());
        }
    }
    if (built.empty()) throw DataError("no signal could be built from '" + config.data_dir.string() + "'");

    nlohmann::json ortho{{"manifest_sha256", hash}};
    if (built.size() == 3) {
        try {
            const auto fund = fund_neutral_returns(data, config.backtest.fund);
            const std::vector<Date> fund_dates(data.dates.begin() + 1, data.dates.end());
            const auto r = orthogonality_report(built, fund_dates, fund);
            ortho["observations"] = r.dates.size();
            ortho["first_date"] = format_date(r.dates.front());
            ortho["last_date"] = format_date(r.dates.back());
            ortho["names"] = r.names;
            ortho["pearson"] = r.pearson;
            auto& regs = ortho["regressions"] = nlohmann::json::array();
            for (const auto& reg : r.regressions) {
                regs.push_back({{"dependent", reg.dependent},
                                {"regressors", reg.regressors},
                                {"intercept", reg.intercept},
                                {"betas", reg.betas},
                                {"r_squared", reg.r_squared},
                                {"adjusted_r_squared", reg.adjusted_r_squared}});
            }
        } catch (const DataError& e) {
            report.warnings.push_back(std::string("orthogonality report skipped: ") + e.what());
        }
    } else {
        report.warnings.push_back("orthogonality report skipped: it needs all three signals");
    }
    ortho["warnings"] = report.warnings;

    std::filesystem::create_directories(config.out_dir);
    const auto csv_path = config.out_dir / "signals.csv";
    {
        io::AtomicFile file(csv_path);
        auto& out = file.stream();
        out << "# manifest_sha256=" << hash << '\n';
        out << "date,name,value\n";
        for (const auto& s : built) {
            for (std::size_t k = 0; k < s.dates.size(); ++k) {
                out << format_date(s.dates[k]) << ',' << signal_name(s.name) << ',' << io::format_double(s.values[k])
                    << '\n';
            }
        }
        file.commit();
    }
    const auto json_path = config.out_dir / "orthogonality.json";
    write_json(ortho, json_path);
    report.outputs = {csv_path, json_path};
    write_manifest(manifest, hash, config.out_dir, report);
    return report;
}

CommandReport cmd_backtest(const RunConfig& config) {
    const auto manifest = make_manifest("backtest", config);
    const auto hash = manifest.hash();
    const auto data = load_from(config);
    const auto inputs = inputs_for(data, config);
    const auto result = run_backtest(inputs, config.backtest);
    const auto summary = summarize(result);

    CommandReport report;
    report.manifest_hash = hash;
    collect_warnings(inputs.warnings, report.warnings);
    collect_warnings(result.warnings, report.warnings);

    std::filesystem::create_directories(config.out_dir);
    const auto comment = comment_for(manifest, hash);
    const auto csv_path = config.out_dir / "backtest.csv";
    const auto diag_path = config.out_dir / "model_diagnostics.csv";
    const auto json_path = config.out_dir / "summary.json";
    write_backtest_csv(result, csv_path, comment);
    write_model_diagnostics(result.diagnostics, diag_path, comment);

    nlohmann::json j = summary;
    j["manifest_sha256"] = hash;
    j["model"] = model_name(config.backtest.model);
    j["cost_regime"] = result.frictionless ? "frictionless" : std::string(cost_mode_name(config.backtest.cost_mode));
    j["days"] = result.rows.size();
    j["warnings"] = report.warnings;
    write_json(j, json_path);
    report.outputs = {csv_path, diag_path, json_path};
    write_manifest(manifest, hash, config.out_dir, report);
    return report;
}

CommandReport cmd_gridsearch(const RunConfig& config) {
    const auto manifest = make_manifest("gridsearch", config);
    const auto hash = manifest.hash();
    const auto data = load_from(config);
    const auto inputs = inputs_for(data, config);
    const auto grid = grid_search(inputs, config.backtest, config.grid);

    CommandReport report;
    report.manifest_hash = hash;
    collect_warnings(inputs.warnings, report.warnings);
    for (const auto& stage : grid.stages) {
        for (const auto& cell : stage.cells) {
            if (!cell.ok) {
                report.warnings.push_back("grid cell lookback=" + std::to_string(cell.lookback) + " gamma_upper=" +
                                          format_setting(cell.gamma_upper) + " gamma_lower=" +
                                          format_setting(cell.gamma_lower) + " failed: " + cell.error);
            }
        }
    }
    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir / "gridsearch.csv";
    write_gridsearch_csv(grid, path,
                         comment_for(manifest, hash) + "\nselected lookback=" + std::to_string(grid.lookback) +
                             " gamma_upper=" + format_setting(grid.gamma_upper) +
                             " gamma_lower=" + format_setting(grid.gamma_lower) +
                             "\neval_start=" + format_date(inputs.dates[grid.eval_start]));
    report.outputs = {path};
    write_manifest(manifest, hash, config.out_dir, report);
    return report;
}

CommandReport cmd_lags(const RunConfig& config) {
    const auto manifest = make_manifest("lags", config);
    const auto hash = manifest.hash();
    const auto data = load_from(config);
    const auto inputs = inputs_for(data, config);
    const auto rows = lag_analysis(inputs, config.backtest, config.lags);

    CommandReport report;
    report.manifest_hash = hash;
    collect_warnings(inputs.warnings, report.warnings);
    for (const auto& r : rows) collect_warnings(r.warnings, report.warnings);
    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir / "lags.csv";
    write_lags_csv(rows, path, comment_for(manifest, hash));
    report.outputs = {path};
    write_manifest(manifest, hash, config.out_dir, report);
    return report;
}

CommandReport cmd_synth(const RunConfig& config) {
    const auto manifest = make_manifest("synth", config);
    const auto hash = manifest.hash();
    SynthConfig synth = config.synth_regime == "planted" ? SynthConfig::planted_regime() : SynthConfig{};
    synth.days = config.synth_days;
    synth.fund = config.backtest.fund;
    synth.hedges = config.backtest.hedges;
    synth.rates_etf = config.signals.credit.rates_etf;
    const auto data = generate_synthetic_market(synth, config.seed);

    CommandReport report;
    report.manifest_hash = hash;
    write_dataset(data, config.out_dir);
    const auto paths = DatasetPaths::in_directory(config.out_dir);
    for (const auto& p : {paths.prices, paths.smiles, paths.trades, paths.treasuries, paths.fund_returns,
                          paths.roster}) {
        if (!p.empty()) report.outputs.push_back(p);
    }
    write_manifest(manifest, hash, config.out_dir, report);
    return report;
}

}  // namespace credhedge::cli
