#include "credhedge/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <tuple>
#include <unordered_map>

#include <boost/math/tools/roots.hpp>

#include "credhedge/io.hpp"

namespace credhedge {

// ---------------------------------------------------------------------------
// TRACE cleaning

std::optional<TradeStatus> parse_trade_status(std::string_view code) {
    if (code == "T" || code == "Trade" || code == "TRADE") return TradeStatus::Trade;
    if (code == "X" || code == "Cancel" || code == "CANCEL") return TradeStatus::Cancel;
    if (code == "C" || code == "Correction" || code == "CORRECTION") return TradeStatus::Correction;
    if (code == "Y" || code == "Reversal" || code == "REVERSAL") return TradeStatus::Reversal;
    return std::nullopt;
}

std::string_view trade_status_code(TradeStatus status) {
    switch (status) {
        case TradeStatus::Trade: return "T";
        case TradeStatus::Cancel: return "X";
        case TradeStatus::Correction: return "C";
        case TradeStatus::Reversal: return "Y";
    }
    return "T";
}

namespace {

std::optional<bool> parse_reversal_flag(std::string_view code) {
    if (code.empty() || code == "N" || code == "0" || code == "false") return false;
    if (code == "R" || code == "1" || code == "true") return true;
    return std::nullopt;
}

// TRACE caps disseminated volume ("5MM+", "1MM+"); those map to the cap.
std::optional<double> parse_volume(std::string_view text) {
    if (text == "5MM+") return 5.0e6;
    if (text == "1MM+") return 1.0e6;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value) || value < 0.0) {
        return std::nullopt;
    }
    return value;
}

struct TradeKey {
    std::string cusip;
    std::int64_t day;
    double volume;
    bool operator==(const TradeKey&) const = default;
};

struct TradeKeyHash {
    std::size_t operator()(const TradeKey& k) const {
        std::size_t h = std::hash<std::string>{}(k.cusip);
        h ^= std::hash<std::int64_t>{}(k.day) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<double>{}(k.volume) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

TradeKey key_of(const BondTrade& t) {
    return {t.cusip, std::chrono::sys_days{t.date}.time_since_epoch().count(), t.volume};
}

}  // namespace

CleanTradeSet clean_trace(std::span<const RawTrade> raw) {
    std::vector<BondTrade> standardized;
    standardized.reserve(raw.size());
    CleanDiagnostics rejected;
    for (const auto& r : raw) {
        const auto status = parse_trade_status(r.status);
        const auto reversal = parse_reversal_flag(r.reversal_flag);
        const auto volume = parse_volume(r.volume);
        if (!status || !reversal || !volume) {
            ++rejected.rejected;
            rejected.messages.push_back("trade " + r.trade_id + ": unparseable " +
                                        (!status ? "status '" + r.status + "'"
                                                 : !reversal ? "reversal flag '" + r.reversal_flag + "'"
                                                             : "volume '" + r.volume + "'"));
            continue;
        }
        standardized.push_back(BondTrade{r.trade_id, r.cusip, r.date, r.price, r.coupon, r.maturity, *volume,
                                         *status, *reversal});
    }
    CleanTradeSet out = clean_trace(std::span<const BondTrade>(standardized));
    out.diagnostics.input_records = raw.size();
    out.diagnostics.rejected = rejected.rejected;
    out.diagnostics.messages.insert(out.diagnostics.messages.begin(), rejected.messages.begin(),
                                    rejected.messages.end());
    return out;
}

CleanTradeSet clean_trace(std::span<const BondTrade> trades) {
    CleanTradeSet out;
    auto& diag = out.diagnostics;
    diag.input_records = trades.size();

    std::vector<bool> removed(trades.size(), false);
    std::unordered_map<TradeKey, std::vector<std::size_t>, TradeKeyHash> originals;
    for (std::size_t i = 0; i < trades.size(); ++i) {
        if (trades[i].status == TradeStatus::Trade) originals[key_of(trades[i])].push_back(i);
    }

    // Pairs a cancel/correction at position j with the first earlier unmatched
    // original sharing (cusip, date, volume); cancels must also match price.
    auto match = [&](std::size_t j, bool require_price) -> bool {
        auto it = originals.find(key_of(trades[j]));
        if (it == originals.end()) return false;
        for (std::size_t i : it->second) {
            if (i >= j) break;
            if (removed[i]) continue;
            if (require_price && trades[i].price != trades[j].price) continue;
            removed[i] = true;
            return true;
        }
        return false;
    };

    // Step 2: same-day cancellations.
    for (std::size_t j = 0; j < trades.size(); ++j) {
        if (trades[j].status != TradeStatus::Cancel) continue;
        removed[j] = true;
        if (match(j, true)) {
            ++diag.cancellations;
        } else {
            ++diag.orphans;
            diag.messages.push_back("cancel " + trades[j].trade_id + ": no matching original report");
        }
    }
    // Step 3: corrections remove themselves and the report they correct.
    for (std::size_t j = 0; j < trades.size(); ++j) {
        if (trades[j].status != TradeStatus::Correction) continue;
        removed[j] = true;
        if (match(j, false)) {
            ++diag.corrections;
        } else {
            ++diag.orphans;
            diag.messages.push_back("correction " + trades[j].trade_id + ": no matching original report");
        }
    }
    // Step 4: reversals ('Y' status with 'R' indicator).
    for (std::size_t j = 0; j < trades.size(); ++j) {
        if (trades[j].status == TradeStatus::Reversal && trades[j].reversal_flag) {
            removed[j] = true;
            ++diag.reversals;
        }
    }

    for (std::size_t i = 0; i < trades.size(); ++i) {
        if (!removed[i]) out.trades.push_back(trades[i]);
    }
    std::sort(out.trades.begin(), out.trades.end(), [](const BondTrade& a, const BondTrade& b) {
        return std::tie(a.cusip, a.date, a.trade_id) < std::tie(b.cusip, b.date, b.trade_id);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Bond arithmetic

namespace {

struct CashFlowSums {
    double price = 0.0;
    double time_weighted = 0.0;  // sum t * CF * df
};

CashFlowSums discount_cash_flows(double ytm, double coupon, double maturity_years) {
    CashFlowSums s;
    const double base = 1.0 + 0.5 * ytm;
    const double coupon_cf = 100.0 * coupon * 0.5;
    for (double t = maturity_years; t > 1e-12; t -= 0.5) {
        const double df = std::pow(base, -2.0 * t);
        const double cf = coupon_cf + (t == maturity_years ? 100.0 : 0.0);
        s.price += cf * df;
        s.time_weighted += t * cf * df;
    }
    return s;
}

double maturity_years(const Date& settle, const Date& maturity) {
    const double years = year_fraction(settle, maturity);
    if (years <= 0.0) {
        throw DataError("bond maturity " + format_date(maturity) + " is not after " + format_date(settle));
    }
    return years;
}

}  // namespace

double bond_price(double ytm, double coupon, const Date& settle, const Date& maturity) {
    return discount_cash_flows(ytm, coupon, maturity_years(settle, maturity)).price;
}

double bond_ytm(double price, double coupon, const Date& settle, const Date& maturity) {
    if (!(price > 0.0)) throw DataError("bond price must be positive");
    const double years = maturity_years(settle, maturity);
    auto f = [&](double y) { return discount_cash_flows(y, coupon, years).price - price; };
    double lo = -0.5;
    double hi = 1.0;
    double f_lo = f(lo);
    double f_hi = f(hi);
    for (int widen = 0; f_hi > 0.0 && widen < 4; ++widen) {
        hi *= 2.0;
        f_hi = f(hi);
    }
    if (f_lo < 0.0 || f_hi > 0.0) throw NumericalError("yield root not bracketed");
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f_lo, f_hi,
                                                          boost::math::tools::eps_tolerance<double>(52), max_iter);
    if (max_iter >= 200) throw NumericalError("yield root-finder did not converge");
    return 0.5 * (a + b);
}

double bond_modified_duration(double ytm, double coupon, const Date& settle, const Date& maturity) {
    const auto s = discount_cash_flows(ytm, coupon, maturity_years(settle, maturity));
    return (s.time_weighted / s.price) / (1.0 + 0.5 * ytm);
}

const TreasuryPoint& match_treasury(const BondTrade& trade, std::span<const TreasuryPoint> curve) {
    if (curve.empty()) {
        throw DataError("no treasury available on " + format_date(trade.date) + " for trade " + trade.trade_id);
    }
    const TreasuryPoint* best = nullptr;
    std::int64_t best_gap = 0;
    double best_coupon_gap = 0.0;
    for (const auto& point : curve) {
        const std::int64_t gap = std::abs(days_between(trade.maturity, point.maturity));
        const double coupon_gap = std::abs(point.coupon - trade.coupon);
        if (!best || gap < best_gap || (gap == best_gap && coupon_gap < best_coupon_gap) ||
            (gap == best_gap && coupon_gap == best_coupon_gap && point.instrument < best->instrument)) {
            best = &point;
            best_gap = gap;
            best_coupon_gap = coupon_gap;
        }
    }
    return *best;
}

double compute_spread(const BondTrade& trade, std::span<const TreasuryPoint> curve) {
    if (!(trade.price > 0.0)) {
        throw DataError("trade " + trade.trade_id + ": price must be positive");
    }
    const auto& treasury = match_treasury(trade, curve);
    try {
        return bond_ytm(trade.price, trade.coupon, trade.date, trade.maturity) - treasury.yield;
    } catch (const NumericalError& e) {
        throw NumericalError("trade " + trade.trade_id + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Loading

DatasetPaths DatasetPaths::in_directory(const std::filesystem::path& dir) {
    auto pick = [&](const char* name) {
        const auto p = dir / name;
        return std::filesystem::exists(p) ? p : std::filesystem::path{};
    };
    return DatasetPaths{pick("prices.csv"),     pick("smiles.csv"),       pick("trades.csv"),
                        pick("treasuries.csv"), pick("fund_returns.csv"), pick("roster.csv")};
}

std::optional<std::size_t> MarketDataset::index_of(const Date& d) const {
    auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return std::nullopt;
    return static_cast<std::size_t>(it - dates.begin());
}

MarketDataset MarketDataset::truncated(const Date& last) const {
    MarketDataset out;
    const auto n = static_cast<std::size_t>(std::upper_bound(dates.begin(), dates.end(), last) - dates.begin());
    out.dates.assign(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(n));
    for (const auto& [id, bars] : prices) out.prices[id].assign(bars.begin(), bars.begin() + static_cast<std::ptrdiff_t>(n));
    for (const auto& [id, pts] : treasuries) out.treasuries[id].assign(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n));
    for (const auto& [id, obs] : funds) out.funds[id].assign(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(n));
    for (const auto& [id, list] : smiles) {
        auto& dst = out.smiles[id];
        for (const auto& s : list) {
            if (s.date <= last) dst.push_back(s);
        }
    }
    for (const auto& t : trades) {
        if (t.date <= last) out.trades.push_back(t);
    }
    for (const auto& r : roster) {
        if (r.effective_date <= last) out.roster.push_back(r);
    }
    out.instruments_without_quotes = instruments_without_quotes;
    out.cost_model_enabled = cost_model_enabled;
    for (const auto& g : gaps) {
        if (g.date <= last) out.gaps.push_back(g);
    }
    return out;
}

namespace {

template <typename T>
using DatedSeries = std::map<std::string, std::map<Date, T>>;

template <typename T>
void insert_unique(DatedSeries<T>& series, const std::string& id, const Date& date, T value,
                   const io::CsvReader& reader, const char* file) {
    auto [it, inserted] = series[id].emplace(date, std::move(value));
    if (!inserted) {
        throw DataError(reader.path().string() + ":" + std::to_string(reader.line()) + ": duplicate date " +
                        format_date(date) + " for '" + id + "' in " + file);
    }
}

DatedSeries<PriceBar> read_prices(const std::filesystem::path& path, std::set<std::string>& no_quotes) {
    io::CsvReader r(path, {"date", "instrument", "close", "bid", "ask", "volume", "duration", "dividend_yield"});
    DatedSeries<PriceBar> out;
    while (r.next()) {
        PriceBar bar;
        bar.date = r.date("date");
        const std::string id(r.text("instrument"));
        bar.close = r.number("close");
        bar.bid = r.optional_number("bid");
        bar.ask = r.optional_number("ask");
        bar.volume = r.number("volume");
        bar.duration = r.optional_number("duration");
        bar.dividend_yield = r.optional_number("dividend_yield").value_or(0.0);
        if (!(bar.close > 0.0)) r.fail("close", "must be positive");
        if (bar.volume < 0.0) r.fail("volume", "must be non-negative");
        if (bar.duration && !(*bar.duration > 0.0)) r.fail("duration", "must be positive when present");
        if (bar.bid.has_value() != bar.ask.has_value()) r.fail("bid", "bid and ask must both be present or both empty");
        if (bar.bid) {
            if (*bar.bid > bar.close) r.fail("bid", "bid above close");
            if (*bar.ask < bar.close) r.fail("ask", "ask below close");
        } else {
            no_quotes.insert(id);
        }
        insert_unique(out, id, bar.date, bar, r, "prices.csv");
    }
    return out;
}

DatedSeries<TreasuryPoint> read_treasuries(const std::filesystem::path& path) {
    io::CsvReader r(path, {"date", "instrument", "coupon", "duration", "maturity", "yield", "return"});
    DatedSeries<TreasuryPoint> out;
    while (r.next()) {
        TreasuryPoint p;
        p.date = r.date("date");
        p.instrument = std::string(r.text("instrument"));
        p.coupon = r.number("coupon");
        p.duration = r.number("duration");
        p.maturity = r.date("maturity");
        p.yield = r.number("yield");
        p.ret = r.number("return");
        if (!(p.duration > 0.0)) r.fail("duration", "must be positive");
        insert_unique(out, p.instrument, p.date, p, r, "treasuries.csv");
    }
    return out;
}

DatedSeries<FundObservation> read_funds(const std::filesystem::path& path) {
    io::CsvReader r(path, {"date", "fund", "return", "duration"});
    DatedSeries<FundObservation> out;
    while (r.next()) {
        FundObservation o;
        o.date = r.date("date");
        const std::string id(r.text("fund"));
        o.ret = r.number("return");
        o.duration = r.number("duration");
        if (!(o.duration > 0.0)) r.fail("duration", "must be positive");
        insert_unique(out, id, o.date, o, r, "fund_returns.csv");
    }
    return out;
}

std::map<std::string, std::vector<VolSmile>> read_smiles(const std::filesystem::path& path) {
    io::CsvReader r(path, {"date", "instrument", "tenor_years", "moneyness_pct", "implied_vol"});
    std::map<std::tuple<std::string, Date, double>, std::vector<std::pair<double, double>>> points;
    while (r.next()) {
        const Date date = r.date("date");
        const std::string id(r.text("instrument"));
        const double tenor = r.number("tenor_years");
        const double m = r.number("moneyness_pct");
        const double vol = r.number("implied_vol");
        if (!(tenor > 0.0)) r.fail("tenor_years", "must be positive");
        if (!(m > 0.0)) r.fail("moneyness_pct", "must be positive");
        if (!(vol > 0.0)) r.fail("implied_vol", "must be positive");
        points[{id, date, tenor}].emplace_back(m, vol);
    }
    std::map<std::string, std::vector<VolSmile>> out;
    for (auto& [key, pts] : points) {
        std::sort(pts.begin(), pts.end());
        VolSmile s{std::get<1>(key), std::get<0>(key), std::get<2>(key), {}, {}};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0 && pts[i].first == pts[i - 1].first) {
                throw DataError(path.string() + ": duplicate moneyness " + io::format_double(pts[i].first) +
                                " for " + s.instrument + " on " + format_date(s.date));
            }
            s.moneyness.push_back(pts[i].first);
            s.vols.push_back(pts[i].second);
        }
        out[s.instrument].push_back(std::move(s));
    }
    return out;
}

std::vector<RawTrade> read_trades(const std::filesystem::path& path) {
    io::CsvReader r(path, {"trade_id", "cusip", "date", "price", "coupon", "maturity", "volume", "status",
                           "reversal_flag"});
    std::vector<RawTrade> out;
    while (r.next()) {
        RawTrade t;
        t.trade_id = std::string(r.text("trade_id"));
        t.cusip = std::string(r.text("cusip"));
        t.date = r.date("date");
        t.price = r.number("price");
        t.coupon = r.number("coupon");
        t.maturity = r.date("maturity");
        t.volume = std::string(r.text("volume"));
        t.status = std::string(r.text("status"));
        t.reversal_flag = std::string(r.text("reversal_flag"));
        if (!(t.price > 0.0)) r.fail("price", "must be positive");
        if (!(t.maturity > t.date)) r.fail("maturity", "must be after trade date");
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<RosterEntry> read_roster(const std::filesystem::path& path) {
    io::CsvReader r(path, {"effective_date", "cusip", "inclusion_date"});
    std::vector<RosterEntry> out;
    while (r.next()) {
        RosterEntry e{r.date("effective_date"), std::string(r.text("cusip")), r.date("inclusion_date")};
        if (e.inclusion_date > e.effective_date) r.fail("inclusion_date", "after effective_date");
        out.push_back(std::move(e));
    }
    return out;
}

template <typename T>
std::vector<T> align(const std::string& source, const std::map<Date, T>& series, const std::vector<Date>& calendar,
                     double max_fraction, std::vector<GapRecord>& gaps) {
    std::vector<T> out;
    out.reserve(calendar.size());
    std::size_t dropped = 0;
    auto cal = calendar.begin();
    for (const auto& [date, value] : series) {
        while (cal != calendar.end() && *cal < date) ++cal;
        if (cal != calendar.end() && *cal == date) {
            out.push_back(value);
        } else {
            ++dropped;
            gaps.push_back({source, date});
        }
    }
    if (!series.empty() && static_cast<double>(dropped) > max_fraction * static_cast<double>(series.size())) {
        throw DataError(source + ": " + std::to_string(dropped) + " of " + std::to_string(series.size()) +
                        " dates fall outside the common calendar (tolerance " + io::format_double(max_fraction) +
                        ")");
    }
    return out;
}

}  // namespace

MarketDataset load_dataset(const DatasetPaths& paths, const DatasetSchema& schema) {
    MarketDataset data;
    if (paths.prices.empty()) throw DataError("prices.csv is required");

    const auto prices = read_prices(paths.prices, data.instruments_without_quotes);
    DatedSeries<TreasuryPoint> treasuries;
    if (!paths.treasuries.empty()) treasuries = read_treasuries(paths.treasuries);
    DatedSeries<FundObservation> funds;
    if (!paths.fund_returns.empty()) funds = read_funds(paths.fund_returns);
    if (!paths.smiles.empty()) data.smiles = read_smiles(paths.smiles);
    if (!paths.trades.empty()) data.trades = read_trades(paths.trades);
    if (!paths.roster.empty()) data.roster = read_roster(paths.roster);

    // Common calendar: dates present in every dated series.
    std::optional<std::set<Date>> common;
    auto intersect = [&](const auto& all) {
        for (const auto& [id, series] : all) {
            std::set<Date> dates;
            for (const auto& [d, v] : series) dates.insert(d);
            if (!common) {
                common = std::move(dates);
            } else {
                std::set<Date> kept;
                std::set_intersection(common->begin(), common->end(), dates.begin(), dates.end(),
                                      std::inserter(kept, kept.end()));
                common = std::move(kept);
            }
        }
    };
    intersect(prices);
    intersect(treasuries);
    intersect(funds);
    if (!common || common->empty()) throw DataError("dataset is empty after aligning business days");
    data.dates.assign(common->begin(), common->end());

    const double tol = schema.max_misaligned_fraction;
    for (const auto& [id, s] : prices) data.prices[id] = align("prices:" + id, s, data.dates, tol, data.gaps);
    for (const auto& [id, s] : treasuries) {
        data.treasuries[id] = align("treasuries:" + id, s, data.dates, tol, data.gaps);
    }
    for (const auto& [id, s] : funds) data.funds[id] = align("fund_returns:" + id, s, data.dates, tol, data.gaps);

    for (auto& [id, list] : data.smiles) {
        std::erase_if(list, [&](const VolSmile& s) { return !data.index_of(s.date).has_value(); });
    }
    data.cost_model_enabled = data.instruments_without_quotes.empty();
    return data;
}

void write_dataset(const MarketDataset& data, const std::filesystem::path& dir) {
    using io::format_double;
    std::filesystem::create_directories(dir);
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; };
    {
        io::AtomicFile f(dir / "prices.csv");
        auto& os = f.stream();
        os << "date,instrument,close,bid,ask,volume,duration,dividend_yield\n";
        for (std::size_t t = 0; t < data.dates.size(); ++t) {
            for (const auto& [id, bars] : data.prices) {
                const auto& b = bars[t];
                os << format_date(b.date) << ',' << id << ',' << format_double(b.close) << ',' << opt(b.bid) << ','
                   << opt(b.ask) << ',' << format_double(b.volume) << ',' << opt(b.duration) << ','
                   << format_double(b.dividend_yield) << '\n';
            }
        }
        f.commit();
    }
    if (!data.treasuries.empty()) {
        io::AtomicFile f(dir / "treasuries.csv");
        auto& os = f.stream();
        os << "date,instrument,coupon,duration,maturity,yield,return\n";
        for (std::size_t t = 0; t < data.dates.size(); ++t) {
            for (const auto& [id, pts] : data.treasuries) {
                const auto& p = pts[t];
                os << format_date(p.date) << ',' << id << ',' << format_double(p.coupon) << ','
                   << format_double(p.duration) << ',' << format_date(p.maturity) << ',' << format_double(p.yield)
                   << ',' << format_double(p.ret) << '\n';
            }
        }
        f.commit();
    }
    if (!data.funds.empty()) {
        io::AtomicFile f(dir / "fund_returns.csv");
        auto& os = f.stream();
        os << "date,fund,return,duration\n";
        for (std::size_t t = 0; t < data.dates.size(); ++t) {
            for (const auto& [id, obs] : data.funds) {
                os << format_date(obs[t].date) << ',' << id << ',' << format_double(obs[t].ret) << ','
                   << format_double(obs[t].duration) << '\n';
            }
        }
        f.commit();
    }
    if (!data.smiles.empty()) {
        io::AtomicFile f(dir / "smiles.csv");
        auto& os = f.stream();
        os << "date,instrument,tenor_years,moneyness_pct,implied_vol\n";
        for (const auto& [id, list] : data.smiles) {
            for (const auto& s : list) {
                for (std::size_t k = 0; k < s.moneyness.size(); ++k) {
                    os << format_date(s.date) << ',' << id << ',' << format_double(s.tenor) << ','
                       << format_double(s.moneyness[k]) << ',' << format_double(s.vols[k]) << '\n';
                }
            }
        }
        f.commit();
    }
    if (!data.trades.empty()) {
        io::AtomicFile f(dir / "trades.csv");
        auto& os = f.stream();
        os << "trade_id,cusip,date,price,coupon,maturity,volume,status,reversal_flag\n";
        for (const auto& t : data.trades) {
            os << t.trade_id << ',' << t.cusip << ',' << format_date(t.date) << ',' << format_double(t.price) << ','
               << format_double(t.coupon) << ',' << format_date(t.maturity) << ',' << t.volume << ',' << t.status
               << ',' << t.reversal_flag << '\n';
        }
        f.commit();
    }
    if (!data.roster.empty()) {
        io::AtomicFile f(dir / "roster.csv");
        auto& os = f.stream();
        os << "effective_date,cusip,inclusion_date\n";
        for (const auto& e : data.roster) {
            os << format_date(e.effective_date) << ',' << e.cusip << ',' << format_date(e.inclusion_date) << '\n';
        }
        f.commit();
    }
}

}  // namespace credhedge
