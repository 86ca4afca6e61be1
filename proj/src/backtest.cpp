#include "credhedge/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "credhedge/durneutral.hpp"
#include "credhedge/io.hpp"

namespace credhedge {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double trailing_sd(std::span<const double> values, std::size_t end, std::size_t n) {
    const std::size_t begin = end + 1 - n;
    double mean = 0.0;
    for (std::size_t i = begin; i <= end; ++i) mean += values[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = begin; i <= end; ++i) ss += (values[i] - mean) * (values[i] - mean);
    return std::sqrt(ss / static_cast<double>(n - 1)) * std::sqrt(kTradingDaysPerYear);
}

std::string at_date(const Date& d, const std::exception& e) { return format_date(d) + ": " + e.what(); }

}  // namespace

std::string_view model_name(ModelKind kind) { return kind == ModelKind::Cca ? "cca" : "ols"; }

std::string_view cost_mode_name(CostMode mode) {
    switch (mode) {
        case CostMode::Frictionless: return "frictionless";
        case CostMode::Full: return "full";
        case CostMode::PositionSpread: return "position_spread";
    }
    return "full";
}

std::string_view funding_mode_name(FundingMode mode) {
    return mode == FundingMode::AnnualizedDaily ? "annualized_daily" : "per_mille";
}

void BacktestConfig::validate() const {
    if (hedges.empty()) throw DataError("at least one hedge instrument is required");
    if (!(fund_size > 0.0)) throw DataError("fund_size must be positive");
    if (!(volume_cap_fraction > 0.0 && volume_cap_fraction <= 1.0)) {
        throw DataError("volume_cap_fraction must lie in (0, 1]");
    }
    if (!(gamma_upper > gamma_lower)) throw DataError("gamma_upper must exceed gamma_lower");
    if (!(funding_bps >= 0.0)) throw DataError("funding_bps must be non-negative");
    if (volume_sma_days < 1) throw DataError("volume_sma_days must be positive");
    if (volatility_days < 2) throw DataError("volatility_days must be at least 2");
    if (model == ModelKind::Cca && lookback < 20) throw DataError("CCA lookback must be at least 20 days");
    if (model == ModelKind::Ols && lookback < 31) throw DataError("OLS lookback must be at least 31 days");
    if (!(gamma_ols >= 0.0 && gamma_ols <= 1.0)) throw DataError("gamma_ols must lie in [0, 1]");
}

// ---------------------------------------------------------------------------
// Inputs

std::vector<double> instrument_neutral_returns(const MarketDataset& data, const std::string& id) {
    const auto it = data.prices.find(id);
    if (it == data.prices.end()) throw DataError("no prices for instrument " + id);
    const auto& bars = it->second;
    AssetReturns asset;
    for (std::size_t t = 1; t < bars.size(); ++t) {
        if (!bars[t].duration) {
            throw DataError("instrument " + id + " has no duration on " + format_date(bars[t].date));
        }
        if (!(bars[t - 1].close > 0.0)) {
            throw DataError("instrument " + id + " has a non-positive close on " + format_date(bars[t - 1].date));
        }
        asset.dates.push_back(bars[t].date);
        asset.returns.push_back(bars[t].close / bars[t - 1].close - 1.0 +
                                bars[t - 1].dividend_yield / kTradingDaysPerYear);
        asset.durations.push_back(*bars[t].duration);
    }
    return duration_neutral_returns(asset, TreasuryPanel::from_dataset(data)).neutral_return;
}

std::vector<double> fund_neutral_returns(const MarketDataset& data, const std::string& id) {
    const auto it = data.funds.find(id);
    if (it == data.funds.end()) throw DataError("no fund returns for " + id);
    AssetReturns asset;
    for (std::size_t t = 1; t < it->second.size(); ++t) {
        const auto& obs = it->second[t];
        asset.dates.push_back(obs.date);
        asset.returns.push_back(obs.ret);
        asset.durations.push_back(obs.duration);
    }
    return duration_neutral_returns(asset, TreasuryPanel::from_dataset(data)).neutral_return;
}

SignalSeries build_signal(const MarketDataset& data, SignalName name, const SignalConfig& config,
                          const std::string& momentum_source) {
    switch (name) {
        case SignalName::Credit: {
            auto result = credit_signal_series(data, config.credit);
            if (result.points.empty()) {
                throw DataError("Credit signal: no day produced a risk-neutral comparison" +
                                (result.skipped.empty() ? std::string{} : " (" + result.skipped.front() + ")"));
            }
            return result.series(config.credit_measure);
        }
        case SignalName::Liquidity: {
            if (data.trades.empty()) throw DataError("Liquidity signal: no bond trades");
            if (data.roster.empty()) throw DataError("Liquidity signal: no index roster");
            const auto cleaned = clean_trace(std::span<const RawTrade>(data.trades));
            const auto priced = price_trades(cleaned, data);
            return liquidity_factor(priced, data.roster, data.dates, config.liquidity);
        }
        case SignalName::Momentum: {
            const std::vector<double> neutral = data.prices.count(momentum_source)
                                                    ? instrument_neutral_returns(data, momentum_source)
                                                    : fund_neutral_returns(data, momentum_source);
            const std::vector<Date> dates(data.dates.begin() + 1, data.dates.end());
            return momentum_signal(dates, cumulative_index(neutral), config.momentum_days, config.momentum_offset);
        }
    }
    throw DataError("unknown signal");
}

BacktestInputs prepare_backtest_inputs(const MarketDataset& data, const std::string& fund,
                                       const std::vector<std::string>& hedges, const SignalConfig& config) {
    if (data.dates.size() < 3) throw DataError("dataset is too short for a backtest");
    if (hedges.empty()) throw DataError("at least one hedge instrument is required");
    if (config.names.empty()) throw DataError("at least one signal is required");

    BacktestInputs in;
    in.dates.assign(data.dates.begin() + 1, data.dates.end());
    in.fund = fund;
    in.fund_neutral = fund_neutral_returns(data, fund);
    for (const auto& id : hedges) {
        InstrumentSeries s;
        s.id = id;
        s.neutral = instrument_neutral_returns(data, id);
        const auto& bars = data.prices.at(id);
        for (std::size_t t = 1; t < bars.size(); ++t) {
            s.close.push_back(bars[t].close);
            s.bid.push_back(bars[t].bid);
            s.ask.push_back(bars[t].ask);
            s.volume.push_back(bars[t].volume);
            if (!bars[t].bid || !bars[t].ask) in.quotes_available = false;
        }
        in.hedges.push_back(std::move(s));
    }

    const std::string momentum_source = config.momentum_source.empty() ? hedges.front() : config.momentum_source;
    const auto n = static_cast<Eigen::Index>(in.dates.size());
    in.signal_names = config.names;
    in.signals = Eigen::MatrixXd::Constant(n, static_cast<Eigen::Index>(config.names.size()), kNaN);
    for (std::size_t j = 0; j < config.names.size(); ++j) {
        const auto series = build_signal(data, config.names[j], config, momentum_source);
        std::size_t k = 0;
        for (Eigen::Index t = 0; t < n; ++t) {
            while (k < series.dates.size() && series.dates[k] < in.dates[static_cast<std::size_t>(t)]) ++k;
            if (k < series.dates.size() && series.dates[k] == in.dates[static_cast<std::size_t>(t)]) {
                in.signals(t, static_cast<Eigen::Index>(j)) = series.values[k];
            }
        }
    }
    Eigen::Index first = 0;
    while (first < n && !in.signals.row(first).allFinite()) ++first;
    if (first == n) throw DataError("the requested signals never overlap");
    in.first_signal_index = static_cast<std::size_t>(first);
    if (!in.quotes_available) in.warnings.push_back("bid/ask quotes missing for a hedge instrument");
    return in;
}

// ---------------------------------------------------------------------------
// Model path

std::size_t model_warmup(const BacktestInputs& inputs, const BacktestConfig& config) {
    std::size_t w = inputs.first_signal_index + static_cast<std::size_t>(config.lookback) - 1;
    w = std::max(w, static_cast<std::size_t>(config.volatility_days) - 1);
    if (config.volume_cap_enabled) w = std::max(w, static_cast<std::size_t>(config.volume_sma_days));
    return w;
}

ModelPath compute_model_path(const BacktestInputs& inputs, const BacktestConfig& config) {
    config.validate();
    const std::size_t T = inputs.dates.size();
    const auto L = static_cast<Eigen::Index>(config.lookback);
    const std::size_t h = inputs.hedges.size();
    const auto vol_n = static_cast<std::size_t>(config.volatility_days);

    ModelPath path;
    path.model = config.model;
    path.lookback = config.lookback;
    path.first_day = model_warmup(inputs, config);
    path.days.resize(T);

    Eigen::MatrixXd hedge_window(L, static_cast<Eigen::Index>(h));
    Eigen::VectorXd fund_window(L);
    std::vector<double> synthetic(T);
    for (std::size_t t = path.first_day; t < T; ++t) {
        auto& day = path.days[t];
        const auto w0 = static_cast<Eigen::Index>(t) - L + 1;
        const Eigen::MatrixXd signals = inputs.signals.middleRows(w0, L);
        if (!signals.allFinite()) {
            day.skip_reason = "signal window incomplete";
            continue;
        }
        for (Eigen::Index r = 0; r < L; ++r) {
            const auto idx = static_cast<std::size_t>(w0 + r);
            fund_window(r) = inputs.fund_neutral[idx];
            for (std::size_t i = 0; i < h; ++i) hedge_window(r, static_cast<Eigen::Index>(i)) = inputs.hedges[i].neutral[idx];
        }
        const double sigma_fund = trailing_sd(inputs.fund_neutral, t, vol_n);
        try {
            if (config.model == ModelKind::Cca) {
                std::vector<double> split(h, 1.0);
                if (h > 1) {
                    const auto pc = pca_first_component(hedge_window);
                    split.assign(pc.weights.data(), pc.weights.data() + pc.weights.size());
                }
                Eigen::MatrixXd responses(L, 2);
                responses.col(0) = fund_window;
                responses.col(1) = hedge_window * Eigen::Map<const Eigen::VectorXd>(split.data(), static_cast<Eigen::Index>(h));
                const std::size_t vol_begin = t + 1 - vol_n;
                for (std::size_t s = vol_begin; s <= t; ++s) {
                    double v = 0.0;
                    for (std::size_t i = 0; i < h; ++i) v += split[i] * inputs.hedges[i].neutral[s];
                    synthetic[s] = v;
                }
                try {
                    const auto fit = cca_fit(signals, responses);
                    day.valid = true;
                    day.achieved_corr = fit.achieved_corr;
                    day.forecast = fit.forecast;
                    day.zscore = fit.zscore;
                    day.w_raw = fit.w_star;
                    day.w_capped = cap_and_scale(fit.w_star, sigma_fund, trailing_sd(synthetic, t, vol_n));
                    day.hedge_split = std::move(split);
                } catch (const DegenerateDirection& e) {
                    day.skip_reason = e.what();
                }
            } else {
                day.ols_weights.resize(h);
                day.ols_indicators.resize(h);
                for (std::size_t i = 0; i < h; ++i) {
                    const Eigen::VectorXd hedge = hedge_window.col(static_cast<Eigen::Index>(i));
                    const auto fit = ols_fit(signals, hedge);
                    const auto beta = ols_hedge_beta(fund_window, hedge);
                    const double w = cap_and_scale(-beta.beta, sigma_fund,
                                                   trailing_sd(inputs.hedges[i].neutral, t, vol_n));
                    day.ols_weights[i] = w;
                    day.ols_indicators[i] = ols_indicator(fit, config.gamma_ols);
                    if (i == 0) {
                        day.forecast = fit.forecast;
                        day.f_stat_p = fit.f_stat_p;
                        day.w_raw = -beta.beta;
                        day.w_capped = w;
                    }
                }
                day.valid = true;
            }
        } catch (const NumericalError& e) {
            throw NumericalError(at_date(inputs.dates[t], e));
        } catch (const DataError& e) {
            throw DataError(at_date(inputs.dates[t], e));
        }
    }
    return path;
}

std::vector<Decision> decide_targets(const BacktestInputs& inputs, const ModelPath& path, const BacktestConfig& config,
                                     std::size_t start) {
    const std::size_t T = inputs.dates.size();
    const std::size_t h = inputs.hedges.size();
    std::vector<Decision> out(T, Decision{false, std::vector<double>(h, 0.0)});
    HedgeTimingState state;
    std::vector<double> held(h, 0.0);
    for (std::size_t t = start; t < T; ++t) {
        const auto& day = path.days[t];
        if (!day.valid) {
            out[t] = Decision{state.on, held};
            continue;
        }
        std::vector<double> target(h, 0.0);
        bool on = false;
        if (config.model == ModelKind::Cca) {
            state = hedge_state_step(state, inputs.dates[t], day.w_capped, day.zscore, config.gamma_upper,
                                     config.gamma_lower);
            on = state.on;
            if (on) {
                const double w = std::min(day.w_capped, 0.0);
                for (std::size_t i = 0; i < h; ++i) target[i] = w * day.hedge_split[i];
            }
        } else {
            for (std::size_t i = 0; i < h; ++i) {
                if (day.ols_indicators[i]) {
                    target[i] = day.ols_weights[i];
                    on = true;
                }
            }
        }
        held = target;
        out[t] = Decision{on, std::move(target)};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Execution

double volume_cap(std::span<const double> volume_history, std::size_t t, double fraction, int sma_days) {
    const auto n = static_cast<std::size_t>(sma_days);
    if (sma_days < 1 || t < n) {
        throw DataError("volume cap needs " + std::to_string(sma_days) + " days of volume history before day " +
                        std::to_string(t));
    }
    if (t >= volume_history.size()) throw DataError("volume cap: day index outside the volume history");
    double sum = 0.0;
    for (std::size_t i = t - n; i < t; ++i) {
        if (!(volume_history[i] >= 0.0)) throw DataError("volume cap: negative or missing volume");
        sum += volume_history[i];
    }
    const double today = volume_history[t];
    if (!(today >= 0.0)) throw DataError("volume cap: negative or missing volume");
    return std::floor(std::min(sum / static_cast<double>(n) * fraction, today));
}

double funding_cost(double weight, const BacktestConfig& config) {
    if (config.cost_mode == CostMode::Frictionless || weight == 0.0) return 0.0;
    const double rate = config.funding_mode == FundingMode::AnnualizedDaily
                            ? config.funding_bps / 1e4 / kTradingDaysPerYear
                            : config.funding_bps / 1000.0;
    return std::abs(weight) * rate;
}

StepOutcome step_day(const PositionState& current, double target_weight, const InstrumentDay& day,
                     const BacktestConfig& config) {
    StepOutcome out;
    out.after = current;
    if (target_weight == current.weight) return out;
    if (!(day.close > 0.0) || !std::isfinite(day.close)) throw DataError("missing or non-positive close on an active day");
    if (std::abs(target_weight) > 1.0) throw DataError("target weight magnitude exceeds 1");

    const double delta = target_weight - current.weight;
    const double sign = delta > 0.0 ? 1.0 : -1.0;
    const double needed = std::abs(delta) * config.fund_size / day.close;
    const double cap = day.cap_shares;
    if (needed <= cap * (1.0 + 1e-9) + 1e-9) {
        const double shares = std::min(std::round(needed), cap);
        out.after.weight = target_weight;
        out.after.shares = current.shares + sign * shares;
        out.traded_shares = shares;
    } else if (cap > 0.0) {
        out.after.weight = current.weight + sign * cap * day.close / config.fund_size;
        out.after.shares = current.shares + sign * cap;
        out.traded_shares = cap;
    } else {
        return out;
    }
    out.weight_change = std::abs(out.after.weight - current.weight);

    if (config.cost_mode != CostMode::Frictionless && out.weight_change > 0.0) {
        if (!day.bid || !day.ask) throw DataError("bid/ask missing on a trade day");
        const double bid = *day.bid;
        const double ask = *day.ask;
        if (!(bid > 0.0) || !(ask >= bid)) throw DataError("invalid bid/ask quote");
        const double half_spread = (ask - bid) / (ask + bid);
        out.spread_cost = config.cost_mode == CostMode::PositionSpread ? half_spread * std::abs(out.after.weight)
                                                                     : half_spread * out.weight_change;
    }
    return out;
}

std::vector<double> BacktestResult::hedged_returns() const {
    std::vector<double> r;
    r.reserve(rows.size());
    for (const auto& row : rows) r.push_back(row.hedged_ret);
    return r;
}

std::vector<double> BacktestResult::fund_returns() const {
    std::vector<double> r;
    r.reserve(rows.size());
    for (const auto& row : rows) r.push_back(row.fund_ret);
    return r;
}

BacktestResult run_backtest(const BacktestInputs& inputs, const BacktestConfig& config) {
    return run_backtest(inputs, config, compute_model_path(inputs, config));
}

BacktestResult run_backtest(const BacktestInputs& inputs, const BacktestConfig& config, const ModelPath& path) {
    config.validate();
    if (path.lookback != config.lookback || path.model != config.model) {
        throw DataError("model path does not match the configuration");
    }
    if (inputs.hedges.size() != config.hedges.size()) throw DataError("inputs and configuration name different hedges");
    const std::size_t T = inputs.dates.size();
    std::size_t start = std::max(model_warmup(inputs, config), path.first_day);
    if (config.eval_start) start = std::max(start, *config.eval_start);
    if (start + 1 >= T) {
        throw DataError("dataset too short: the first evaluation day would be index " + std::to_string(start) +
                        " of " + std::to_string(T));
    }

    BacktestConfig effective = config;
    BacktestResult result;
    if (config.cost_mode != CostMode::Frictionless && !inputs.quotes_available) {
        effective.cost_mode = CostMode::Frictionless;
        result.warnings.push_back("bid/ask quotes unavailable: costs disabled, results are frictionless");
    }
    result.frictionless = effective.cost_mode == CostMode::Frictionless;
    for (const auto& s : inputs.hedges) result.hedges.push_back(s.id);

    const auto decisions = decide_targets(inputs, path, effective, start);
    for (std::size_t t = start; t < T; ++t) {
        const auto& day = path.days[t];
        ModelDiagnosticRow diag;
        diag.date = inputs.dates[t];
        diag.model = std::string(model_name(config.model));
        diag.achieved_corr = day.achieved_corr;
        diag.forecast = day.forecast;
        diag.zscore = day.zscore;
        diag.indicator = decisions[t].on ? 1 : 0;
        diag.w_raw = day.w_raw;
        diag.w_capped = day.w_capped;
        result.diagnostics.push_back(std::move(diag));
    }

    const std::size_t h = inputs.hedges.size();
    const Decision idle{false, std::vector<double>(h, 0.0)};
    const auto lag = static_cast<std::int64_t>(config.lag);
    const auto eval_days = static_cast<std::int64_t>(T - start);
    if (std::abs(lag) >= eval_days) {
        result.warnings.push_back("lag " + std::to_string(lag) +
                                  " exceeds the evaluation span; the run is truncated and no decision executes");
    } else if (lag < 0) {
        result.warnings.push_back("lead of " + std::to_string(-lag) +
                                  " days: the final decision is held over the last days of the run");
    }

    std::vector<PositionState> positions(h);
    result.rows.reserve(T - start);
    for (std::size_t t = start; t < T; ++t) {
        BacktestRow row;
        row.date = inputs.dates[t];
        row.fund_ret = inputs.fund_neutral[t];
        double frictionless = row.fund_ret;
        double funding = 0.0;
        for (std::size_t i = 0; i < h; ++i) {
            frictionless += positions[i].weight * inputs.hedges[i].neutral[t];
            funding += funding_cost(positions[i].weight, effective);
        }

        const std::int64_t d = static_cast<std::int64_t>(t) - lag;
        const Decision* decision = &idle;
        if (std::abs(lag) < eval_days) {
            if (d >= static_cast<std::int64_t>(start) && d < static_cast<std::int64_t>(T)) {
                decision = &decisions[static_cast<std::size_t>(d)];
            } else if (d >= static_cast<std::int64_t>(T)) {
                decision = &decisions[T - 1];
            }
        }

        double spread = 0.0;
        row.weight.resize(h);
        row.target = decision->target;
        row.traded_shares.resize(h);
        row.cap_shares.resize(h);
        for (std::size_t i = 0; i < h; ++i) {
            const auto& s = inputs.hedges[i];
            InstrumentDay iday{s.close[t], s.bid[t], s.ask[t], std::numeric_limits<double>::infinity()};
            try {
                if (effective.volume_cap_enabled) {
                    iday.cap_shares = volume_cap(s.volume, t, effective.volume_cap_fraction, effective.volume_sma_days);
                }
                const auto step = step_day(positions[i], decision->target[i], iday, effective);
                positions[i] = step.after;
                spread += step.spread_cost;
                row.traded_shares[i] = step.traded_shares;
            } catch (const DataError& e) {
                throw DataError(at_date(row.date, e) + " (" + s.id + ")");
            }
            row.weight[i] = positions[i].weight;
            row.cap_shares[i] = iday.cap_shares;
        }
        row.state_on = decision->on;
        row.frictionless_ret = frictionless;
        row.spread_cost = spread;
        row.funding_cost = funding;
        row.hedged_ret = frictionless - spread - funding;
        result.rows.push_back(std::move(row));
    }
    return result;
}

BacktestResult run_backtest(const MarketDataset& data, const BacktestConfig& config, const SignalConfig& signals) {
    const auto inputs = prepare_backtest_inputs(data, config.fund, config.hedges, signals);
    auto result = run_backtest(inputs, config);
    result.warnings.insert(result.warnings.begin(), inputs.warnings.begin(), inputs.warnings.end());
    return result;
}

void write_backtest_csv(const BacktestResult& result, const std::filesystem::path& path,
                        const std::string& header_comment) {
    io::AtomicFile file(path);
    auto& out = file.stream();
    if (!header_comment.empty()) {
        std::size_t pos = 0;
        while (pos <= header_comment.size()) {
            const auto nl = header_comment.find('\n', pos);
            out << "# " << header_comment.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos) << '\n';
            if (nl == std::string::npos) break;
            pos = nl + 1;
        }
    }
    if (result.frictionless) out << "# cost_regime=frictionless\n";
    out << "date,fund_ret,hedged_ret";
    for (const auto& id : result.hedges) out << ",weight_" << id;
    for (const auto& id : result.hedges) out << ",traded_shares_" << id;
    out << ",spread_cost,funding_cost,state,frictionless_ret\n";
    for (const auto& row : result.rows) {
        out << format_date(row.date) << ',' << io::format_double(row.fund_ret) << ','
            << io::format_double(row.hedged_ret);
        for (double w : row.weight) out << ',' << io::format_double(w);
        for (double s : row.traded_shares) out << ',' << io::format_double(s);
        out << ',' << io::format_double(row.spread_cost) << ',' << io::format_double(row.funding_cost) << ','
            << (row.state_on ? "on" : "off") << ',' << io::format_double(row.frictionless_ret) << '\n';
    }
    file.commit();
}

}  // namespace credhedge
