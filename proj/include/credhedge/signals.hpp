#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "credhedge/core.hpp"
#include "credhedge/marketdata.hpp"
#include "credhedge/rnd.hpp"

namespace credhedge {

enum class SignalName { Credit, Liquidity, Momentum };

std::string_view signal_name(SignalName name);
std::optional<SignalName> parse_signal_name(std::string_view text);

/// Dated signal values. `filled[i]` marks values carried forward from an
/// earlier day because the day had no fresh observation.
struct SignalSeries {
    SignalName name = SignalName::Credit;
    std::vector<Date> dates;
    std::vector<double> values;
    std::vector<bool> filled;
};

/// Turns sparse observations into a series on `calendar`, starting at the
/// first observation and carrying values forward at most max_fill_days
/// consecutive business days. Throws DataError when staleness exceeds that.
SignalSeries forward_filled(SignalName name, const std::vector<Date>& calendar,
                            const std::vector<std::pair<Date, double>>& observations, int max_fill_days);

// ---------------------------------------------------------------------------
// Liquidity

struct PricedTrade {
    std::string trade_id;
    std::string cusip;
    Date date;
    double market_value = 0.0;
    double duration = 0.0;
    double spread = 0.0;
};

/// Yield, spread (vs. the matched treasury on the trade date) and modified
/// duration for each cleaned trade. Trades on dates without a treasury curve
/// are skipped and counted in `skipped`.
std::vector<PricedTrade> price_trades(const CleanTradeSet& trades, const MarketDataset& data,
                                      std::size_t* skipped = nullptr);

struct LiquidityOptions {
    int inclusion_window_days = 1095;  // calendar days after first index inclusion
    int max_fill_days = 5;
};

/// Market-value-weighted duration-times-spread of constituent bonds traded
/// each day.
SignalSeries liquidity_factor(std::span<const PricedTrade> trades, std::span<const RosterEntry> roster,
                              const std::vector<Date>& calendar, const LiquidityOptions& options = {});

// ---------------------------------------------------------------------------
// Momentum

/// Compounds daily returns into an index starting at 1 before the first day.
std::vector<double> cumulative_index(std::span<const double> returns);

inline constexpr double kDegenerateSigma = 1e-12;

/// z-score of the n-day cumulative index return, skipping the most recent
/// `offset` days, against its previous n values.
SignalSeries momentum_signal(const std::vector<Date>& dates, std::span<const double> index, int n, int offset = 22);

// ---------------------------------------------------------------------------
// Credit

enum class CreditMeasure { ExcessProbability, ExcessExpectedDrawdown };

struct CreditOptions {
    std::string credit_etf = "LQD";
    std::string rates_etf = "IEF";
    double tail_prob = 0.01;
    double risk_free = 0.0;
    double flat_tolerance = kDefaultFlatTolerance;
    double grid_lo_pct = 50.0;
    double grid_hi_pct = 150.0;
    double grid_step_pct = 0.5;
    int max_fill_days = 5;
};

struct CreditSignalResult {
    std::vector<CreditRiskPoint> points;
    SignalSeries excess_probability;
    SignalSeries excess_expected_drawdown;
    std::vector<std::string> skipped;  // "date: reason" for days that failed extraction

    const SignalSeries& series(CreditMeasure measure) const {
        return measure == CreditMeasure::ExcessProbability ? excess_probability : excess_expected_drawdown;
    }
};

CreditSignalResult credit_signal_series(const MarketDataset& data, const CreditOptions& options);

// ---------------------------------------------------------------------------
// Orthogonality diagnostics

struct SignalRegression {
    std::string dependent;
    std::array<std::string, 2> regressors;
    double intercept = 0.0;
    std::array<double, 2> betas{};
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    std::vector<double> residuals;
};

struct OrthogonalityReport {
    std::vector<Date> dates;
    std::vector<std::string> names;             // fund, then the three signals
    std::vector<std::vector<double>> pearson;   // names x names
    std::vector<SignalRegression> regressions;  // one per signal
};

/// Pearson matrix over {fund, signals...} and, for each signal, an OLS
/// regression on the other two with intercept.
OrthogonalityReport orthogonality_report(std::span<const SignalSeries> signals, const std::vector<Date>& fund_dates,
                                         std::span<const double> fund_neutral);

}  // namespace credhedge
