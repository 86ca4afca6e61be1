// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cca_oracles.hpp"
#include "credhedge/backtest.hpp"
#include "credhedge/durneutral.hpp"
#include "credhedge/metrics.hpp"
#include "credhedge/models.hpp"
#include "credhedge/rnd.hpp"
#include "credhedge/synth.hpp"
#include "support.hpp"

using namespace credhedge;
using credhedge::testing::business_days;
using credhedge::testing::gaussian_matrix;
using credhedge::testing::lognormal_cdf;
using credhedge::testing::lognormal_pdf;
using credhedge::testing::ymd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

// ---------------------------------------------------------------------------

struct DensityError {
    double pdf = 0.0;
    double cdf = 0.0;
};

DensityError density_error(double step) {
    const VolCurve flat(ymd(2020, 3, 20), 0.25, {50.0, 150.0}, {0.2, 0.2});
    const auto dist = extract_distribution(flat, 100.0, 0.0, 0.0, GridSpec{50.0, 150.0, step});
    DensityError e;
    for (std::size_t j = 0; j < dist.strikes.size(); ++j) {
        const double k = dist.strikes[j];
        e.pdf = std::max(e.pdf, std::abs(dist.pdf[j] - lognormal_pdf(k, 100.0, 0.2, 0.25)));
        e.cdf = std::max(e.cdf, std::abs(dist.cdf[j] - lognormal_cdf(k, 100.0, 0.2, 0.25)));
    }
    return e;
}

Outcome density_oracle() {
    const auto start = Clock::now();
    const auto coarse = density_error(0.5);
    const double runtime = seconds_since(start);
    const auto fine = density_error(0.25);
    Outcome o;
    o.pass = coarse.pdf <= 1e-3 && coarse.cdf <= 1e-4 && fine.pdf <= 0.5 * coarse.pdf && fine.cdf <= 0.5 * coarse.cdf &&
             runtime < 1.0;
    o.detail = fmt("max pdf err %.3g, max cdf err %.3g, halved-step pdf err %.3g, extraction %.3f s", coarse.pdf,
                   coarse.cdf, fine.pdf, runtime);
    return o;
}

Outcome cdf_sanitization() {
    const std::vector<double> moneyness{50, 60, 70, 80, 85, 90, 95, 97.5, 100, 102.5, 105, 110, 115, 120, 130, 140, 150};
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> vol(0.02, 1.2);
    std::uniform_real_distribution<double> rate(0.0, 0.05);
    // Strikes from 10% to 250% of spot.
    const auto grid = GridSpec::relative(100.0, 10.0, 250.0, 0.5);
    int bad_cdfs = 0;
    int bad_self = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        VolSmile s;
        s.date = ymd(2020, 3, 20);
        s.instrument = "LQD";
        s.tenor = 0.25;
        s.moneyness = moneyness;
        for (std::size_t i = 0; i < moneyness.size(); ++i) s.vols.push_back(vol(rng));
        const auto dist = extract_distribution(fit_vol_curve(s), 100.0, rate(rng), 0.0, grid);
        bool ok = true;
        for (std::size_t j = 0; j < dist.cdf.size(); ++j) {
            ok = ok && dist.cdf[j] >= 0.0 && dist.cdf[j] <= 1.0 && (j == 0 || dist.cdf[j] >= dist.cdf[j - 1]);
        }
        bad_cdfs += ok ? 0 : 1;
        if (trial < 100) {
            const auto p = credit_signals(dist, dist, 0.01);
            if (!(p.prob_exceeds == 0.01 && p.excess_expected_drawdown == 0.0 && p.excess_probability == 0.0)) {
                ++bad_self;
            }
        }
    }
    Outcome o;
    o.pass = bad_cdfs == 0 && bad_self == 0;
    o.detail = fmt("%.0f of 1000 sanitized cdfs invalid, %.0f of 100 self-comparisons differ from (0.01, 0)",
                   bad_cdfs, bad_self);
    return o;
}

Outcome duration_neutralization() {
    const std::size_t n = 750;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> jitter(-0.4, 0.4), mix(0.0, 1.0);
    std::normal_distribution<double> ret(0.0, 0.004);
    TreasuryPanel panel;
    AssetReturns asset;
    panel.dates = business_days(ymd(2018, 1, 2), n);
    asset.dates = panel.dates;
    panel.ids = {"T10", "T2", "T4", "T6"};
    const std::vector<double> base{9.0, 2.0, 4.0, 6.0};
    panel.durations.assign(4, std::vector<double>(n));
    panel.returns.assign(4, std::vector<double>(n));
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < 4; ++k) {
            panel.durations[k][t] = base[k] + jitter(rng);
            panel.returns[k][t] = ret(rng);
        }
        const double w = mix(rng);
        asset.durations.push_back(w * panel.durations[2][t] + (1 - w) * panel.durations[3][t]);
        asset.returns.push_back(w * panel.returns[2][t] + (1 - w) * panel.returns[3][t] + 0.001);
    }
    const auto series = duration_neutral_returns(asset, panel);
    double worst_alpha = 0.0;
    for (double r : series.neutral_return) worst_alpha = std::max(worst_alpha, std::abs(r - 0.001));

    const std::vector<TreasuryDuration> universe{{"T2", 2.0}, {"T4", 4.0}, {"T6", 6.0}, {"T10", 10.0}};
    std::uniform_real_distribution<double> target(2.0, 10.0);
    double worst_sum = 0.0, worst_duration = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double d = target(rng);
        const auto b = bracket_treasuries(d, universe);
        worst_sum = std::max(worst_sum, std::abs(b.w_lower + b.w_upper - 1.0));
        worst_duration = std::max(worst_duration, std::abs(b.w_lower * b.d_lower + b.w_upper * b.d_upper - d));
    }
    Outcome o;
    o.pass = series.neutral_return.size() == n && worst_alpha <= 1e-12 && worst_sum <= 1e-12 &&
             worst_duration <= 1e-12;
    o.detail = fmt("alpha err %.2g over %.0f days; bracket weight-sum err %.2g, duration err %.2g", worst_alpha,
                   static_cast<double>(n), worst_sum, worst_duration);
    return o;
}

Outcome cca_correctness() {
    std::mt19937_64 rng(4242);
    double worst_spectral = 0.0, worst_grid = 0.0;
    for (int instance = 0; instance < 50; ++instance) {
        const Eigen::MatrixXd x = gaussian_matrix(rng, 50, 3);
        Eigen::MatrixXd y = gaussian_matrix(rng, 50, 2);
        y.col(0) += 0.4 * x.col(instance % 3);
        const auto pair = first_canonical_pair(x, y);
        worst_spectral = std::max(worst_spectral, std::abs(pair.correlation - testing::spectral_oracle(x, y)));
        worst_grid = std::max(worst_grid, testing::sphere_grid_max(x, y) - pair.correlation);
    }
    Outcome o;
    o.pass = worst_spectral <= 1e-8 && worst_grid <= 1e-3;
    o.detail = fmt("50 instances: max |rho - spectral| %.2g, max (grid - rho) %.2g", worst_spectral, worst_grid);
    return o;
}

Outcome hysteresis_lattice() {
    const Date d = ymd(2021, 6, 1);
    const std::vector<double> uppers{-0.5, 0.0, 1.0, 1.5, 2.5, 3.0};
    const std::vector<double> lowers{-3.0, -1.5, -1.0, -0.5, 0.0, 1.0};
    const std::vector<double> weights{-1.0, -0.3, -1e-12, 0.0, 1e-12, 0.4};
    std::vector<double> zs;
    for (int i = -16; i <= 16; ++i) zs.push_back(0.25 * i);
    zs.push_back(-std::numeric_limits<double>::infinity());
    zs.push_back(std::numeric_limits<double>::infinity());

    long cases = 0, mismatches = 0;
    for (double gu : uppers) {
        for (double gl : lowers) {
            if (!(gu > gl)) continue;
            for (bool on : {false, true}) {
                for (HedgeCause prior : {HedgeCause::NeverOn, HedgeCause::EntrySignal, HedgeCause::ExitMeanRevert}) {
                    if (on && prior != HedgeCause::EntrySignal) continue;
                    if (!on && prior == HedgeCause::EntrySignal) continue;
                    HedgeTimingState state;
                    state.on = on;
                    state.cause = prior;
                    for (double w : weights) {
                        for (double z : zs) {
                            // Off -> On on a short forecast above the entry threshold;
                            // On -> Off once z falls below the exit threshold.
                            bool expect_on = on;
                            HedgeCause expect_cause = prior;
                            bool moved = false;
                            if (!on && w < 0.0 && z > gu) {
                                expect_on = true;
                                expect_cause = HedgeCause::EntrySignal;
                                moved = true;
                            } else if (on && z < gl) {
                                expect_on = false;
                                expect_cause = HedgeCause::ExitMeanRevert;
                                moved = true;
                            }
                            const auto next = hedge_state_step(state, d, w, z, gu, gl);
                            const bool ok = next.on == expect_on && next.cause == expect_cause &&
                                            (moved ? next.last_transition == d
                                                   : next.last_transition == state.last_transition);
                            ++cases;
                            mismatches += ok ? 0 : 1;
                        }
                    }
                }
            }
        }
    }
    Outcome o;
    o.pass = mismatches == 0;
    o.detail = fmt("%.0f lattice cases, %.0f mismatches", static_cast<double>(cases), static_cast<double>(mismatches));
    return o;
}

int days_to_full_short(double fund_size, double price, double sma_volume) {
    BacktestConfig config;
    config.fund_size = fund_size;
    config.cost_mode = CostMode::Frictionless;
    const std::size_t warmup = static_cast<std::size_t>(config.volume_sma_days);
    const std::vector<double> volume(warmup + 5000, sma_volume);
    PositionState pos;
    int days = 0;
    for (std::size_t t = warmup; std::abs(pos.weight) < 1.0 && t < volume.size(); ++t) {
        const InstrumentDay day{price, std::nullopt, std::nullopt,
                                volume_cap(volume, t, config.volume_cap_fraction, config.volume_sma_days)};
        pos = step_day(pos, -1.0, day, config).after;
        ++days;
    }
    return days;
}

Outcome volume_large_fund() {
    const int days = days_to_full_short(1e10, 100.0, 1e6);
    return {days == 1000, fmt("$10bln at $100, SMA 1,000,000 shares: %.0f days (expected 1000)", days)};
}

Outcome volume_small_fund() {
    // The 143,000-share SMA is back-solved from the stated 35-day figure.
    const int days = days_to_full_short(5e8, 100.0, 143000.0);
    return {std::abs(days - 35) <= 1, fmt("$500mln at $100, SMA 143,000 shares: %.0f days (expected 35 +/- 1)", days)};
}

struct PlantedMarket {
    MarketDataset data;
    SignalConfig signals;
    BacktestConfig config;
    BacktestInputs inputs;
};

const PlantedMarket& planted_market() {
    static const PlantedMarket m = [] {
        PlantedMarket p;
        p.data = generate_synthetic_market(SynthConfig::planted_regime(), 7);
        p.inputs = prepare_backtest_inputs(p.data, p.config.fund, p.config.hedges, p.signals);
        return p;
    }();
    return m;
}

Outcome cost_accounting() {
    SynthConfig synth;
    synth.days = 500;
    synth.windows = {{220, 15, -0.10, 4.0, 5}, {400, 20, -0.12, 6.0, 4}};
    const auto data = generate_synthetic_market(synth, 500);
    SignalConfig signals;
    signals.momentum_days = 40;
    signals.momentum_offset = 5;
    BacktestConfig config;
    config.lookback = 40;
    config.gamma_upper = 1.0;
    config.gamma_lower = -1.0;
    config.volatility_days = 60;
    config.volume_sma_days = 60;
    config.fund_size = 5e9;
    const auto inputs = prepare_backtest_inputs(data, config.fund, config.hedges, signals);

    double worst = 0.0;
    int active_days = 0;
    std::vector<double> cumulative;
    for (double bps : {20.0, 50.0, 100.0, 200.0}) {
        config.funding_bps = bps;
        const auto result = run_backtest(inputs, config);
        double wealth = 1.0;
        for (const auto& row : result.rows) {
            worst = std::max(worst, std::abs(row.hedged_ret + row.spread_cost + row.funding_cost - row.frictionless_ret));
            wealth *= 1.0 + row.hedged_ret;
            if (bps == 20.0 && row.weight[0] != 0.0) ++active_days;
        }
        cumulative.push_back(wealth);
    }
    bool monotone = true;
    for (std::size_t i = 1; i < cumulative.size(); ++i) monotone = monotone && cumulative[i] <= cumulative[i - 1];
    Outcome o;
    o.pass = worst <= 1e-12 && active_days > 0 && monotone;
    o.detail = fmt("max reconciliation err %.2g over 500 days, %.0f hedged days, cumulative growth %.6f (20bp) to "
                   "%.6f (200bp)",
                   worst, active_days, cumulative.front(), cumulative.back());
    o.detail += monotone ? ", non-increasing in funding" : ", NOT monotone in funding";
    return o;
}

Outcome planted_regime() {
    const auto& m = planted_market();
    const auto base = summarize(run_backtest(m.inputs, m.config));
    const bool shallower = base.hedged.max_drawdown > base.baseline.max_drawdown;
    const bool better = base.delta.sortino > 0.0;

    const auto stage_start = Clock::now();
    const auto report = grid_search(m.inputs, m.config, GridSpecification{});
    const double stage_seconds = seconds_since(stage_start);
    const auto& stage1 = report.stages.front();
    const int selected = stage1.cells[stage1.selected].lookback;

    GridSpecification full;
    full.gamma_uppers = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5};
    const auto grid_start = Clock::now();
    const auto cells = full_grid(m.inputs, m.config, full);
    const double grid_seconds = seconds_since(grid_start);

    Outcome o;
    o.pass = shallower && better && selected == 40 && cells.size() == 180 && grid_seconds < 60.0;
    o.detail = fmt("MDD hedged %.4f vs baseline %.4f, dSortino %.4f, stage-1 lookback %.0f", base.hedged.max_drawdown,
                   base.baseline.max_drawdown, base.delta.sortino, selected);
    o.detail += fmt(" (planted favorable 40); staged search %.1f s, full 5x6x6 grid %.1f s", stage_seconds,
                    grid_seconds);
    return o;
}

bool same_row(const BacktestRow& a, const BacktestRow& b) {
    return a.date == b.date && a.fund_ret == b.fund_ret && a.hedged_ret == b.hedged_ret &&
           a.frictionless_ret == b.frictionless_ret && a.spread_cost == b.spread_cost &&
           a.funding_cost == b.funding_cost && a.state_on == b.state_on && a.weight == b.weight &&
           a.target == b.target && a.traded_shares == b.traded_shares && a.cap_shares == b.cap_shares;
}

Outcome truncate_replay() {
    const auto& m = planted_market();
    const auto full = run_backtest(m.data, m.config, m.signals);
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, full.rows.size() - 1);
    int mismatched = 0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t cut = pick(rng);
        const auto partial = run_backtest(m.data.truncated(full.rows[cut].date), m.config, m.signals);
        bool ok = partial.rows.size() == cut + 1;
        for (std::size_t r = 0; ok && r <= cut; ++r) ok = same_row(partial.rows[r], full.rows[r]);
        mismatched += ok ? 0 : 1;
    }
    return {mismatched == 0, fmt("20 truncation dates, %.0f prefix mismatches", mismatched)};
}

bool same_block(const MetricsBlock& a, const MetricsBlock& b) {
    return a.annual_return == b.annual_return && a.annual_std == b.annual_std && a.downside_std == b.downside_std &&
           a.max_drawdown == b.max_drawdown && a.sortino == b.sortino && a.sortino_infinite == b.sortino_infinite &&
           a.annual_turnover == b.annual_turnover;
}

Outcome lag_identity() {
    const auto& m = planted_market();
    const std::vector<int> lags{0, 10};
    const auto rows = lag_analysis(m.inputs, m.config, lags);
    const auto base = summarize(run_backtest(m.inputs, m.config));
    const bool identical = rows.size() == 2 && same_block(rows[0].summary.hedged, base.hedged) &&
                           same_block(rows[0].summary.baseline, base.baseline) &&
                           rows[0].summary.delta.sortino == base.delta.sortino &&
                           rows[0].summary.delta.max_drawdown == base.delta.max_drawdown;
    const bool ordered = rows.size() == 2 && rows[1].summary.delta.sortino <= rows[0].summary.delta.sortino;
    Outcome o;
    o.pass = identical && ordered;
    o.detail = std::string("lag 0 ") + (identical ? "matches" : "DIFFERS FROM") + " the base backtest";
    if (rows.size() == 2) {
        o.detail += fmt("; dSortino lag 0 %.4f, lag 10 %.4f", rows[0].summary.delta.sortino,
                        rows[1].summary.delta.sortino);
    }
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1", "density oracle", density_oracle},
        {"2", "cdf sanitization", cdf_sanitization},
        {"3", "duration neutralization", duration_neutralization},
        {"4", "cca correctness", cca_correctness},
        {"5", "hysteresis lattice", hysteresis_lattice},
        {"6a", "volume arithmetic, large fund", volume_large_fund},
        {"6b", "volume arithmetic, small fund", volume_small_fund},
        {"7", "cost accounting", cost_accounting},
        {"8", "planted regime end to end", planted_regime},
        {"9", "no lookahead", truncate_replay},
        {"10", "lag identity", lag_identity},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        const auto start = Clock::now();
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("[%s] %-3s %-30s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    seconds_since(start));
        if (std::string(c.id) == "6b" && !o.pass) {
            std::printf("       info: with a 10%% cap, 35 days at $500mln needs an SMA of 1,430,000 shares "
                        "(%d days)\n",
                        days_to_full_short(5e8, 100.0, 1.43e6));
        }
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
