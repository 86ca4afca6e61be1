#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "credhedge/core.hpp"
#include "credhedge/marketdata.hpp"
#include "credhedge/models.hpp"
#include "credhedge/signals.hpp"

namespace credhedge {

enum class ModelKind { Cca, Ols };
enum class CostMode { Frictionless, Full, PositionSpread };
enum class FundingMode { AnnualizedDaily, PerMille };

std::string_view model_name(ModelKind kind);
std::string_view cost_mode_name(CostMode mode);
std::string_view funding_mode_name(FundingMode mode);

/// How the three signals are built from a dataset.
struct SignalConfig {
    std::vector<SignalName> names{SignalName::Liquidity, SignalName::Momentum, SignalName::Credit};
    CreditOptions credit;
    CreditMeasure credit_measure = CreditMeasure::ExcessProbability;
    LiquidityOptions liquidity;
    std::string momentum_source;  // empty: first hedge instrument
    int momentum_days = 252;
    int momentum_offset = 22;
};

struct BacktestConfig {
    std::string fund = "FUND";
    std::vector<std::string> hedges{"LQD"};
    ModelKind model = ModelKind::Cca;
    int lookback = 40;
    double gamma_upper = 2.5;
    double gamma_lower = -1.5;
    double gamma_ols = 0.05;
    double fund_size = 1e9;
    double funding_bps = 50.0;
    FundingMode funding_mode = FundingMode::AnnualizedDaily;
    CostMode cost_mode = CostMode::Full;
    bool volume_cap_enabled = true;
    double volume_cap_fraction = 0.10;
    int volume_sma_days = 252;
    int volatility_days = 252;
    int lag = 0;                                // execution delay in business days (negative leads)
    std::optional<std::size_t> eval_start;      // force a later first evaluation day (index into inputs)

    /// Throws DataError on inconsistent values.
    void validate() const;
};

/// Duration-neutral daily returns for a traded instrument (close-to-close
/// return plus dividend accrual, minus the duration-matched treasury return),
/// aligned to data.dates[1..].
std::vector<double> instrument_neutral_returns(const MarketDataset& data, const std::string& id);

/// Same for a fund from the fund return table.
std::vector<double> fund_neutral_returns(const MarketDataset& data, const std::string& id);

struct InstrumentSeries {
    std::string id;
    std::vector<double> close;
    std::vector<std::optional<double>> bid;
    std::vector<std::optional<double>> ask;
    std::vector<double> volume;
    std::vector<double> neutral;
};

/// Everything a backtest needs, aligned to one date axis (the dataset's dates
/// without its first day, which has no return).
struct BacktestInputs {
    std::vector<Date> dates;
    std::string fund;
    std::vector<double> fund_neutral;
    std::vector<InstrumentSeries> hedges;
    std::vector<SignalName> signal_names;
    Eigen::MatrixXd signals;  // dates x signals, NaN where unavailable
    std::size_t first_signal_index = 0;
    bool quotes_available = true;
    std::vector<std::string> warnings;
};

/// Signals requested by `config`, each on the dataset calendar. Throws
/// DataError naming the signal that cannot be built.
SignalSeries build_signal(const MarketDataset& data, SignalName name, const SignalConfig& config,
                          const std::string& momentum_source);

BacktestInputs prepare_backtest_inputs(const MarketDataset& data, const std::string& fund,
                                       const std::vector<std::string>& hedges, const SignalConfig& config);

// ---------------------------------------------------------------------------
// Model path

/// Per-day model output, before any hysteresis.
struct ModelDay {
    bool valid = false;
    std::string skip_reason;
    double achieved_corr = std::numeric_limits<double>::quiet_NaN();
    double forecast = std::numeric_limits<double>::quiet_NaN();
    double zscore = std::numeric_limits<double>::quiet_NaN();
    double f_stat_p = std::numeric_limits<double>::quiet_NaN();
    double w_raw = 0.0;                // CCA: W*; OLS: -beta of the first hedge
    double w_capped = 0.0;             // after cap_and_scale
    std::vector<double> hedge_split;   // CCA: share of the synthetic hedge per instrument
    std::vector<double> ols_weights;   // OLS: capped -beta_i per instrument (before the indicator)
    std::vector<int> ols_indicators;
};

struct ModelPath {
    ModelKind model = ModelKind::Cca;
    int lookback = 0;
    std::size_t first_day = 0;  // first index with enough history
    std::vector<ModelDay> days;
};

/// First index at which a model with this configuration can produce output.
std::size_t model_warmup(const BacktestInputs& inputs, const BacktestConfig& config);

ModelPath compute_model_path(const BacktestInputs& inputs, const BacktestConfig& config);

/// Hysteresis (CCA) or per-day indicator (OLS) decisions for each day.
struct Decision {
    bool on = false;
    std::vector<double> target;  // per hedge instrument
};

std::vector<Decision> decide_targets(const BacktestInputs& inputs, const ModelPath& path, const BacktestConfig& config,
                                     std::size_t start);

// ---------------------------------------------------------------------------
// Execution

/// Shares tradable on day t: floor(min(SMA(volume over the preceding
/// sma_days days) * fraction, volume[t])). Throws DataError with too little
/// history.
double volume_cap(std::span<const double> volume_history, std::size_t t, double fraction, int sma_days);

struct PositionState {
    double weight = 0.0;  // per unit of fund, negative = short
    double shares = 0.0;  // signed
};

struct InstrumentDay {
    double close = 0.0;
    std::optional<double> bid;
    std::optional<double> ask;
    double cap_shares = std::numeric_limits<double>::infinity();
};

struct StepOutcome {
    PositionState after;
    double traded_shares = 0.0;  // absolute
    double weight_change = 0.0;  // absolute
    double spread_cost = 0.0;    // as a fraction of fund value
};

/// Moves one instrument toward its target weight at the day's close under the
/// volume cap and charges the spread cost for the trade.
StepOutcome step_day(const PositionState& current, double target_weight, const InstrumentDay& day,
                     const BacktestConfig& config);

/// Funding drag for holding |weight| for one day.
double funding_cost(double weight, const BacktestConfig& config);

struct BacktestRow {
    Date date;
    double fund_ret = 0.0;
    double frictionless_ret = 0.0;
    double hedged_ret = 0.0;
    double spread_cost = 0.0;
    double funding_cost = 0.0;
    bool state_on = false;
    std::vector<double> weight;         // post-trade at the close
    std::vector<double> target;
    std::vector<double> traded_shares;
    std::vector<double> cap_shares;
};

struct BacktestResult {
    std::vector<std::string> hedges;
    std::vector<BacktestRow> rows;
    std::vector<ModelDiagnosticRow> diagnostics;
    bool frictionless = false;  // costs disabled (by configuration or missing quotes)
    std::vector<std::string> warnings;

    std::vector<double> hedged_returns() const;
    std::vector<double> fund_returns() const;
};

BacktestResult run_backtest(const BacktestInputs& inputs, const BacktestConfig& config);

/// Reuses a precomputed model path (its lookback and model must match).
BacktestResult run_backtest(const BacktestInputs& inputs, const BacktestConfig& config, const ModelPath& path);

BacktestResult run_backtest(const MarketDataset& data, const BacktestConfig& config, const SignalConfig& signals);

void write_backtest_csv(const BacktestResult& result, const std::filesystem::path& path,
                        const std::string& header_comment = {});

}  // namespace credhedge
