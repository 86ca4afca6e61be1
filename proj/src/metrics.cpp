#include "credhedge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "credhedge/io.hpp"

namespace credhedge {
namespace {

std::string csv_number(double v) { return io::format_double(v); }

void write_comment(std::ostream& out, const std::string& header_comment) {
    if (header_comment.empty()) return;
    std::size_t pos = 0;
    while (true) {
        const auto nl = header_comment.find('\n', pos);
        out << "# " << header_comment.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos) << '\n';
        if (nl == std::string::npos) break;
        pos = nl + 1;
    }
}

bool better(const GridCell& candidate, const GridCell& incumbent) {
    const double a = candidate.summary.delta.sortino;
    const double b = incumbent.summary.delta.sortino;
    if (std::abs(a - b) > 1e-12 && !(std::isinf(a) && std::isinf(b) && a == b)) return a > b;
    return candidate.summary.hedged.annual_turnover < incumbent.summary.hedged.annual_turnover;
}

}  // namespace

MetricsBlock metrics_block(std::span<const double> r, double turnover) {
    if (r.empty()) throw DataError("metrics: empty return series");
    if (r.size() < 2) throw DataError("metrics: need at least two observations");
    const auto n = static_cast<double>(r.size());
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= n;
    double ss = 0.0;
    double down_ss = 0.0;
    std::size_t negatives = 0;
    for (double x : r) {
        ss += (x - mean) * (x - mean);
        if (x < 0.0) {
            down_ss += x * x;
            ++negatives;
        }
    }
    MetricsBlock m;
    m.annual_return = mean * kTradingDaysPerYear;
    m.annual_std = std::sqrt(ss / (n - 1.0)) * std::sqrt(kTradingDaysPerYear);
    m.max_drawdown = max_drawdown(r);
    m.annual_turnover = turnover;
    if (negatives == 0) {
        m.downside_std = 0.0;
        m.sortino = std::numeric_limits<double>::infinity();
        m.sortino_infinite = true;
    } else {
        m.downside_std = std::sqrt(down_ss / static_cast<double>(negatives)) * std::sqrt(kTradingDaysPerYear);
        m.sortino = m.annual_return / m.downside_std;
    }
    return m;
}

double max_drawdown(std::span<const double> r) {
    double level = 1.0;
    double peak = 1.0;
    double worst = 0.0;
    for (double x : r) {
        level *= 1.0 + x;
        peak = std::max(peak, level);
        worst = std::min(worst, level / peak - 1.0);
    }
    return std::max(worst, -1.0);
}

double annual_turnover(const BacktestResult& result) {
    if (result.rows.empty()) return 0.0;
    std::map<int, double> per_year;
    std::vector<double> previous(result.hedges.size(), 0.0);
    for (const auto& row : result.rows) {
        double traded = 0.0;
        for (std::size_t i = 0; i < row.weight.size(); ++i) {
            traded += std::abs(row.weight[i] - previous[i]);
            previous[i] = row.weight[i];
        }
        per_year[static_cast<int>(row.date.year())] += traded;
    }
    double total = 0.0;
    for (const auto& [year, value] : per_year) total += value;
    return total / static_cast<double>(per_year.size());
}

DeltaMetrics delta_metrics(const MetricsBlock& hedged, const MetricsBlock& baseline) {
    DeltaMetrics d;
    d.annual_std = hedged.annual_std - baseline.annual_std;
    d.downside_std = hedged.downside_std - baseline.downside_std;
    d.max_drawdown = hedged.max_drawdown - baseline.max_drawdown;
    d.annual_return = hedged.annual_return - baseline.annual_return;
    d.sortino = hedged.sortino_infinite && baseline.sortino_infinite ? 0.0 : hedged.sortino - baseline.sortino;
    d.annual_turnover = hedged.annual_turnover - baseline.annual_turnover;
    return d;
}

BacktestSummary summarize(const BacktestResult& result) {
    BacktestSummary s;
    const auto hedged = result.hedged_returns();
    const auto fund = result.fund_returns();
    s.hedged = metrics_block(hedged, annual_turnover(result));
    s.baseline = metrics_block(fund, 0.0);
    s.delta = delta_metrics(s.hedged, s.baseline);
    return s;
}

// ---------------------------------------------------------------------------
// Grid search

const ModelPath& ModelPathCache::get(const BacktestConfig& config) {
    const auto key = std::make_pair(static_cast<int>(config.model), config.lookback);
    auto it = paths_.find(key);
    if (it == paths_.end()) it = paths_.emplace(key, compute_model_path(inputs_, config)).first;
    return it->second;
}

std::size_t common_eval_start(const BacktestInputs& inputs, const BacktestConfig& base, std::span<const int> lookbacks) {
    std::size_t start = base.eval_start.value_or(0);
    for (int lb : lookbacks) {
        BacktestConfig cfg = base;
        cfg.lookback = lb;
        start = std::max(start, model_warmup(inputs, cfg));
    }
    return start;
}

namespace {

GridCell run_cell(const BacktestInputs& inputs, BacktestConfig cfg, ModelPathCache& cache) {
    GridCell cell;
    cell.lookback = cfg.lookback;
    cell.gamma_upper = cfg.gamma_upper;
    cell.gamma_lower = cfg.gamma_lower;
    try {
        const auto& path = cache.get(cfg);
        cell.summary = summarize(run_backtest(inputs, cfg, path));
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

std::size_t select_cell(const GridStage& stage) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < stage.cells.size(); ++i) {
        if (!stage.cells[i].ok) continue;
        if (!best || better(stage.cells[i], stage.cells[*best])) best = i;
    }
    if (!best) {
        throw DataError("grid stage '" + stage.name + "': every cell failed" +
                        (stage.cells.empty() ? std::string{} : " (" + stage.cells.front().error + ")"));
    }
    return *best;
}

}  // namespace

GridSearchReport grid_search(const BacktestInputs& inputs, const BacktestConfig& base, const GridSpecification& grids) {
    if (grids.lookbacks.empty() || grids.gamma_uppers.empty() || grids.gamma_lowers.empty()) {
        throw DataError("grid search needs non-empty grids");
    }
    GridSearchReport report;
    report.eval_start = common_eval_start(inputs, base, grids.lookbacks);
    BacktestConfig cfg = base;
    cfg.eval_start = report.eval_start;
    ModelPathCache cache(inputs);

    GridStage lookback{"lookback", {}, 0};
    for (int lb : grids.lookbacks) {
        cfg.lookback = lb;
        lookback.cells.push_back(run_cell(inputs, cfg, cache));
    }
    lookback.selected = select_cell(lookback);
    cfg.lookback = lookback.cells[lookback.selected].lookback;
    report.stages.push_back(std::move(lookback));

    GridStage upper{"gamma_upper", {}, 0};
    for (double g : grids.gamma_uppers) {
        cfg.gamma_upper = g;
        upper.cells.push_back(run_cell(inputs, cfg, cache));
    }
    upper.selected = select_cell(upper);
    cfg.gamma_upper = upper.cells[upper.selected].gamma_upper;
    report.stages.push_back(std::move(upper));

    GridStage lower{"gamma_lower", {}, 0};
    for (double g : grids.gamma_lowers) {
        cfg.gamma_lower = g;
        lower.cells.push_back(run_cell(inputs, cfg, cache));
    }
    lower.selected = select_cell(lower);
    cfg.gamma_lower = lower.cells[lower.selected].gamma_lower;
    report.stages.push_back(std::move(lower));

    report.lookback = cfg.lookback;
    report.gamma_upper = cfg.gamma_upper;
    report.gamma_lower = cfg.gamma_lower;
    return report;
}

std::vector<GridCell> full_grid(const BacktestInputs& inputs, const BacktestConfig& base,
                                const GridSpecification& grids) {
    BacktestConfig cfg = base;
    cfg.eval_start = common_eval_start(inputs, base, grids.lookbacks);
    ModelPathCache cache(inputs);
    std::vector<GridCell> cells;
    cells.reserve(grids.lookbacks.size() * grids.gamma_uppers.size() * grids.gamma_lowers.size());
    for (int lb : grids.lookbacks) {
        cfg.lookback = lb;
        for (double gu : grids.gamma_uppers) {
            cfg.gamma_upper = gu;
            for (double gl : grids.gamma_lowers) {
                cfg.gamma_lower = gl;
                cells.push_back(run_cell(inputs, cfg, cache));
            }
        }
    }
    return cells;
}

// ---------------------------------------------------------------------------
// Lag analysis

std::vector<LagRow> lag_analysis(const BacktestInputs& inputs, const BacktestConfig& config, std::span<const int> lags) {
    const auto path = compute_model_path(inputs, config);
    std::vector<LagRow> rows;
    for (int lag : lags) {
        BacktestConfig cfg = config;
        cfg.lag = lag;
        const auto result = run_backtest(inputs, cfg, path);
        rows.push_back(LagRow{lag, summarize(result), result.warnings});
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Reports

void write_gridsearch_csv(const GridSearchReport& report, const std::filesystem::path& path,
                          const std::string& header_comment) {
    io::AtomicFile file(path);
    auto& out = file.stream();
    write_comment(out, header_comment);
    out << "stage,lookback,gamma_upper,gamma_lower,status,d_std,d_downside_std,d_max_drawdown,d_annual_return,"
           "d_sortino,d_turnover,selected\n";
    for (const auto& stage : report.stages) {
        for (std::size_t i = 0; i < stage.cells.size(); ++i) {
            const auto& c = stage.cells[i];
            out << stage.name << ',' << c.lookback << ',' << csv_number(c.gamma_upper) << ','
                << csv_number(c.gamma_lower) << ',' << (c.ok ? "ok" : "failed");
            if (c.ok) {
                const auto& d = c.summary.delta;
                out << ',' << csv_number(d.annual_std) << ',' << csv_number(d.downside_std) << ','
                    << csv_number(d.max_drawdown) << ',' << csv_number(d.annual_return) << ','
                    << csv_number(d.sortino) << ',' << csv_number(d.annual_turnover);
            } else {
                out << ",,,,,,";
            }
            out << ',' << (i == stage.selected ? 1 : 0) << '\n';
        }
    }
    file.commit();
}

void write_lags_csv(const std::vector<LagRow>& rows, const std::filesystem::path& path,
                    const std::string& header_comment) {
    io::AtomicFile file(path);
    auto& out = file.stream();
    write_comment(out, header_comment);
    out << "lag,annual_return,annual_std,downside_std,max_drawdown,sortino,annual_turnover,d_sortino\n";
    for (const auto& r : rows) {
        const auto& m = r.summary.hedged;
        out << r.lag << ',' << csv_number(m.annual_return) << ',' << csv_number(m.annual_std) << ','
            << csv_number(m.downside_std) << ',' << csv_number(m.max_drawdown) << ',' << csv_number(m.sortino) << ','
            << csv_number(m.annual_turnover) << ',' << csv_number(r.summary.delta.sortino) << '\n';
    }
    file.commit();
}

void to_json(nlohmann::json& j, const MetricsBlock& m) {
    j = nlohmann::json{{"annual_return", m.annual_return},
                       {"annual_std", m.annual_std},
                       {"downside_std", m.downside_std},
                       {"max_drawdown", m.max_drawdown},
                       {"sortino", m.sortino_infinite ? nlohmann::json(nullptr) : nlohmann::json(m.sortino)},
                       {"sortino_infinite", m.sortino_infinite},
                       {"annual_turnover", m.annual_turnover}};
}

void to_json(nlohmann::json& j, const DeltaMetrics& d) {
    j = nlohmann::json{{"d_std", d.annual_std},
                       {"d_downside_std", d.downside_std},
                       {"d_max_drawdown", d.max_drawdown},
                       {"d_annual_return", d.annual_return},
                       {"d_sortino", std::isfinite(d.sortino) ? nlohmann::json(d.sortino) : nlohmann::json(nullptr)},
                       {"d_turnover", d.annual_turnover}};
}

void to_json(nlohmann::json& j, const BacktestSummary& s) {
    j = nlohmann::json{{"hedged", s.hedged}, {"baseline", s.baseline}, {"delta", s.delta}};
}

}  // namespace credhedge
