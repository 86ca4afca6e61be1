#include "credhedge/signals.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "credhedge/io.hpp"

namespace credhedge {

std::string_view signal_name(SignalName name) {
    switch (name) {
        case SignalName::Credit: return "Credit";
        case SignalName::Liquidity: return "Liquidity";
        case SignalName::Momentum: return "Momentum";
    }
    return "Credit";
}

std::optional<SignalName> parse_signal_name(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (lower == "credit") return SignalName::Credit;
    if (lower == "liquidity") return SignalName::Liquidity;
    if (lower == "momentum") return SignalName::Momentum;
    return std::nullopt;
}

SignalSeries forward_filled(SignalName name, const std::vector<Date>& calendar,
                            const std::vector<std::pair<Date, double>>& observations, int max_fill_days) {
    SignalSeries s;
    s.name = name;
    std::size_t k = 0;
    int stale = 0;
    for (const Date& day : calendar) {
        while (k < observations.size() && observations[k].first < day) ++k;
        const bool fresh = k < observations.size() && observations[k].first == day;
        if (fresh) {
            s.dates.push_back(day);
            s.values.push_back(observations[k].second);
            s.filled.push_back(false);
            stale = 0;
        } else if (!s.values.empty()) {
            if (++stale > max_fill_days) {
                throw DataError(std::string(signal_name(name)) + " signal: no observation for more than " +
                                std::to_string(max_fill_days) + " business days at " + format_date(day));
            }
            s.dates.push_back(day);
            s.values.push_back(s.values.back());
            s.filled.push_back(true);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Liquidity

std::vector<PricedTrade> price_trades(const CleanTradeSet& trades, const MarketDataset& data, std::size_t* skipped) {
    std::vector<PricedTrade> out;
    out.reserve(trades.trades.size());
    std::size_t missing = 0;
    std::map<Date, std::vector<TreasuryPoint>> curves;
    for (const auto& trade : trades.trades) {
        const auto idx = data.index_of(trade.date);
        if (!idx || data.treasuries.empty()) {
            ++missing;
            continue;
        }
        auto [it, inserted] = curves.try_emplace(trade.date);
        if (inserted) {
            for (const auto& [id, pts] : data.treasuries) it->second.push_back(pts[*idx]);
        }
        const double ytm = bond_ytm(trade.price, trade.coupon, trade.date, trade.maturity);
        const double spread = ytm - match_treasury(trade, it->second).yield;
        out.push_back(PricedTrade{trade.trade_id, trade.cusip, trade.date, trade.volume,
                                  bond_modified_duration(ytm, trade.coupon, trade.date, trade.maturity), spread});
    }
    if (skipped) *skipped = missing;
    return out;
}

SignalSeries liquidity_factor(std::span<const PricedTrade> trades, std::span<const RosterEntry> roster,
                              const std::vector<Date>& calendar, const LiquidityOptions& options) {
    std::map<std::string, std::vector<const RosterEntry*>> membership;
    for (const auto& e : roster) membership[e.cusip].push_back(&e);

    // First inclusion date known as of `day` (roster rows effective later are ignored).
    auto qualifies = [&](const PricedTrade& t) {
        auto it = membership.find(t.cusip);
        if (it == membership.end()) return false;
        std::optional<Date> first;
        for (const RosterEntry* e : it->second) {
            if (e->effective_date <= t.date && (!first || e->inclusion_date < *first)) first = e->inclusion_date;
        }
        if (!first || t.date < *first) return false;
        return days_between(*first, t.date) <= options.inclusion_window_days;
    };

    struct DayTotals {
        double weighted = 0.0;
        double market_value = 0.0;
        std::size_t count = 0;
    };
    std::map<Date, DayTotals> totals;
    for (const auto& t : trades) {
        if (!qualifies(t)) continue;
        if (t.market_value < 0.0) throw DataError("trade " + t.trade_id + ": negative market value");
        auto& d = totals[t.date];
        d.weighted += t.market_value * t.duration * t.spread;
        d.market_value += t.market_value;
        ++d.count;
    }
    std::vector<std::pair<Date, double>> obs;
    obs.reserve(totals.size());
    for (const auto& [day, d] : totals) {
        if (!(d.market_value > 0.0)) {
            throw DataError("liquidity factor: total market value is zero on " + format_date(day));
        }
        obs.emplace_back(day, d.weighted / d.market_value);
    }
    return forward_filled(SignalName::Liquidity, calendar, obs, options.max_fill_days);
}

// ---------------------------------------------------------------------------
// Momentum

std::vector<double> cumulative_index(std::span<const double> returns) {
    std::vector<double> index(returns.size());
    double level = 1.0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        level *= 1.0 + returns[i];
        index[i] = level;
    }
    return index;
}

SignalSeries momentum_signal(const std::vector<Date>& dates, std::span<const double> index, int n, int offset) {
    if (n < 2 || offset < 0) throw DataError("momentum: need n >= 2 and offset >= 0");
    if (dates.size() != index.size()) throw DataError("momentum: dates and index differ in length");
    const auto un = static_cast<std::size_t>(n);
    const auto uoff = static_cast<std::size_t>(offset);
    const std::size_t first_c = un + uoff;
    const std::size_t first_z = first_c + un;
    if (index.size() <= first_z) {
        throw DataError("momentum: insufficient history; the first z-score needs " + std::to_string(first_z + 1) +
                        " observations but only " + std::to_string(index.size()) + " are available" +
                        (index.empty() ? std::string{}
                                       : " (series starts " + format_date(dates.front()) + ")"));
    }
    std::vector<double> c(index.size(), 0.0);
    for (std::size_t t = first_c; t < index.size(); ++t) {
        const double base = index[t - un - uoff];
        if (!(base > 0.0)) throw DataError("momentum: index level must be positive");
        c[t] = index[t - uoff] / base - 1.0;
    }
    SignalSeries s;
    s.name = SignalName::Momentum;
    for (std::size_t t = first_z; t < index.size(); ++t) {
        double mean = 0.0;
        for (std::size_t i = 1; i <= un; ++i) mean += c[t - i];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 1; i <= un; ++i) ss += (c[t - i] - mean) * (c[t - i] - mean);
        const double sigma = std::sqrt(ss / static_cast<double>(n - 1));
        s.dates.push_back(dates[t]);
        s.values.push_back(sigma < kDegenerateSigma ? 0.0 : (c[t] - mean) / sigma);
        s.filled.push_back(false);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Credit

CreditSignalResult credit_signal_series(const MarketDataset& data, const CreditOptions& options) {
    const auto credit_smiles = data.smiles.find(options.credit_etf);
    const auto rates_smiles = data.smiles.find(options.rates_etf);
    if (credit_smiles == data.smiles.end() || rates_smiles == data.smiles.end()) {
        throw DataError("credit signal needs smiles for both " + options.credit_etf + " and " + options.rates_etf);
    }
    const auto credit_prices = data.prices.find(options.credit_etf);
    const auto rates_prices = data.prices.find(options.rates_etf);
    if (credit_prices == data.prices.end() || rates_prices == data.prices.end()) {
        throw DataError("credit signal needs prices for both " + options.credit_etf + " and " + options.rates_etf);
    }

    std::map<Date, const VolSmile*> rates_by_date;
    for (const auto& s : rates_smiles->second) rates_by_date[s.date] = &s;

    CreditSignalResult result;
    std::vector<std::pair<Date, double>> prob_obs;
    std::vector<std::pair<Date, double>> dd_obs;
    for (const auto& credit_smile : credit_smiles->second) {
        auto match = rates_by_date.find(credit_smile.date);
        if (match == rates_by_date.end()) continue;
        const auto idx = data.index_of(credit_smile.date);
        if (!idx) continue;
        const VolSmile& rates_smile = *match->second;
        try {
            if (credit_smile.tenor != rates_smile.tenor) throw DataError("tenor mismatch");
            const auto& cbar = credit_prices->second[*idx];
            const auto& rbar = rates_prices->second[*idx];
            const auto credit_dist = extract_distribution(
                fit_vol_curve(credit_smile, options.flat_tolerance), cbar.close, options.risk_free,
                cbar.dividend_yield,
                GridSpec::relative(cbar.close, options.grid_lo_pct, options.grid_hi_pct, options.grid_step_pct));
            const auto rates_dist = extract_distribution(
                fit_vol_curve(rates_smile, options.flat_tolerance), rbar.close, options.risk_free,
                rbar.dividend_yield,
                GridSpec::relative(rbar.close, options.grid_lo_pct, options.grid_hi_pct, options.grid_step_pct));
            const auto point = credit_signals(credit_dist, rates_dist, options.tail_prob);
            result.points.push_back(point);
            prob_obs.emplace_back(point.date, point.excess_probability);
            dd_obs.emplace_back(point.date, point.excess_expected_drawdown);
        } catch (const std::exception& e) {
            result.skipped.push_back(format_date(credit_smile.date) + ": " + e.what());
        }
    }
    result.excess_probability = forward_filled(SignalName::Credit, data.dates, prob_obs, options.max_fill_days);
    result.excess_expected_drawdown = forward_filled(SignalName::Credit, data.dates, dd_obs, options.max_fill_days);
    return result;
}

// ---------------------------------------------------------------------------
// Orthogonality

OrthogonalityReport orthogonality_report(std::span<const SignalSeries> signals, const std::vector<Date>& fund_dates,
                                         std::span<const double> fund_neutral) {
    if (signals.size() != 3) throw DataError("orthogonality report needs exactly three signals");
    if (fund_dates.size() != fund_neutral.size()) throw DataError("fund dates and returns differ in length");

    // Common dates across the fund series and every signal.
    std::vector<Date> common = fund_dates;
    for (const auto& s : signals) {
        std::vector<Date> kept;
        std::set_intersection(common.begin(), common.end(), s.dates.begin(), s.dates.end(), std::back_inserter(kept));
        common = std::move(kept);
    }
    const auto n = static_cast<Eigen::Index>(common.size());
    if (n <= 30) {
        throw DataError("orthogonality report needs more than 30 common observations, found " + std::to_string(n));
    }

    OrthogonalityReport report;
    report.dates = common;
    report.names.push_back("fund");
    for (const auto& s : signals) report.names.emplace_back(signal_name(s.name));

    Eigen::MatrixXd data(n, 4);
    auto fill_column = [&](Eigen::Index col, const std::vector<Date>& dates, std::span<const double> values) {
        std::size_t k = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            while (dates[k] < common[static_cast<std::size_t>(i)]) ++k;
            data(i, col) = values[k];
        }
    };
    fill_column(0, fund_dates, fund_neutral);
    for (std::size_t j = 0; j < 3; ++j) fill_column(static_cast<Eigen::Index>(j + 1), signals[j].dates, signals[j].values);

    const Eigen::RowVectorXd mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - mean;
    const Eigen::VectorXd sd = centered.colwise().norm();
    for (Eigen::Index j = 0; j < 4; ++j) {
        if (!(sd(j) > 1e-12 * std::max(1.0, data.col(j).cwiseAbs().maxCoeff()) * std::sqrt(double(n)))) {
            throw DataError("correlation undefined: series '" + report.names[static_cast<std::size_t>(j)] +
                            "' is constant");
        }
    }
    report.pearson.assign(4, std::vector<double>(4, 0.0));
    for (Eigen::Index a = 0; a < 4; ++a) {
        for (Eigen::Index b = 0; b < 4; ++b) {
            const double r = a == b ? 1.0 : centered.col(a).dot(centered.col(b)) / (sd(a) * sd(b));
            report.pearson[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::clamp(r, -1.0, 1.0);
        }
    }

    for (Eigen::Index dep = 1; dep < 4; ++dep) {
        Eigen::MatrixXd design(n, 3);
        design.col(0).setOnes();
        SignalRegression reg;
        reg.dependent = report.names[static_cast<std::size_t>(dep)];
        int slot = 0;
        for (Eigen::Index j = 1; j < 4; ++j) {
            if (j == dep) continue;
            design.col(1 + slot) = data.col(j);
            reg.regressors[static_cast<std::size_t>(slot)] = report.names[static_cast<std::size_t>(j)];
            ++slot;
        }
        const Eigen::VectorXd y = data.col(dep);
        const Eigen::VectorXd beta = design.completeOrthogonalDecomposition().solve(y);
        const Eigen::VectorXd resid = y - design * beta;
        const double sse = resid.squaredNorm();
        const double sst = (y.array() - y.mean()).matrix().squaredNorm();
        reg.intercept = beta(0);
        reg.betas = {beta(1), beta(2)};
        reg.r_squared = 1.0 - sse / sst;
        reg.adjusted_r_squared = 1.0 - (1.0 - reg.r_squared) * double(n - 1) / double(n - 3);
        reg.residuals.assign(resid.data(), resid.data() + resid.size());
        report.regressions.push_back(std::move(reg));
    }
    return report;
}

}  // namespace credhedge
