#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "credhedge/backtest.hpp"

namespace credhedge {

struct MetricsBlock {
    double annual_return = 0.0;
    double annual_std = 0.0;
    double downside_std = 0.0;
    double max_drawdown = 0.0;
    double sortino = 0.0;
    bool sortino_infinite = false;  // no negative returns: sortino = +inf
    double annual_turnover = 0.0;
};

/// Annualized (x252) mean, sqrt(252)-scaled sample std, downside deviation
/// about zero over the strictly negative returns, Sortino and max drawdown.
MetricsBlock metrics_block(std::span<const double> daily_returns, double annual_turnover = 0.0);

/// Worst peak-to-trough decline of the compounded index (<= 0).
double max_drawdown(std::span<const double> daily_returns);

/// Sum of |dW| over all hedges per calendar year, averaged over the years
/// covered by the ledger.
double annual_turnover(const BacktestResult& result);

struct DeltaMetrics {
    double annual_std = 0.0;
    double downside_std = 0.0;
    double max_drawdown = 0.0;
    double annual_return = 0.0;
    double sortino = 0.0;
    double annual_turnover = 0.0;
};

DeltaMetrics delta_metrics(const MetricsBlock& hedged, const MetricsBlock& baseline);

struct BacktestSummary {
    MetricsBlock hedged;
    MetricsBlock baseline;
    DeltaMetrics delta;
};

BacktestSummary summarize(const BacktestResult& result);

// ---------------------------------------------------------------------------
// Grid search

struct GridSpecification {
    std::vector<int> lookbacks{20, 40, 60, 125, 250};
    std::vector<double> gamma_uppers{2.0, 2.5, 3.0};
    std::vector<double> gamma_lowers{-0.5, -1.0, -1.5, -2.0, -2.5, -3.0};
};

struct GridCell {
    int lookback = 0;
    double gamma_upper = 0.0;
    double gamma_lower = 0.0;
    bool ok = false;
    std::string error;
    BacktestSummary summary;
};

struct GridStage {
    std::string name;  // "lookback", "gamma_upper", "gamma_lower"
    std::vector<GridCell> cells;
    std::size_t selected = 0;
};

struct GridSearchReport {
    std::vector<GridStage> stages;
    int lookback = 0;
    double gamma_upper = 0.0;
    double gamma_lower = 0.0;
    std::size_t eval_start = 0;
};

/// Caches one model path per lookback so threshold sweeps reuse the fits.
class ModelPathCache {
public:
    explicit ModelPathCache(const BacktestInputs& inputs) : inputs_(inputs) {}
    const ModelPath& get(const BacktestConfig& config);

private:
    const BacktestInputs& inputs_;
    std::map<std::pair<int, int>, ModelPath> paths_;
};

/// Index of the first day that every lookback in the grid can evaluate.
std::size_t common_eval_start(const BacktestInputs& inputs, const BacktestConfig& base, std::span<const int> lookbacks);

/// Staged search: lookback, then gamma_upper, then gamma_lower, each stage
/// maximizing the Sortino delta with ties going to lower turnover.
GridSearchReport grid_search(const BacktestInputs& inputs, const BacktestConfig& base, const GridSpecification& grids);

/// Every lookback x gamma_upper x gamma_lower combination.
std::vector<GridCell> full_grid(const BacktestInputs& inputs, const BacktestConfig& base,
                                const GridSpecification& grids);

// ---------------------------------------------------------------------------
// Lag analysis

struct LagRow {
    int lag = 0;
    BacktestSummary summary;
    std::vector<std::string> warnings;
};

std::vector<LagRow> lag_analysis(const BacktestInputs& inputs, const BacktestConfig& config, std::span<const int> lags);

// ---------------------------------------------------------------------------
// Reports

void write_gridsearch_csv(const GridSearchReport& report, const std::filesystem::path& path,
                          const std::string& header_comment = {});
void write_lags_csv(const std::vector<LagRow>& rows, const std::filesystem::path& path,
                    const std::string& header_comment = {});

/// Infinite Sortino values are written as null with a flag.
void to_json(nlohmann::json& j, const MetricsBlock& m);
void to_json(nlohmann::json& j, const DeltaMetrics& d);
void to_json(nlohmann::json& j, const BacktestSummary& s);

}  // namespace credhedge
