#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "credhedge/core.hpp"

namespace credhedge {

struct PriceBar {
    Date date;
    double close = 0.0;
    std::optional<double> bid;
    std::optional<double> ask;
    double volume = 0.0;
    std::optional<double> duration;
    double dividend_yield = 0.0;
};

/// One day's implied-vol quote curve, moneyness in percent of spot.
struct VolSmile {
    Date date;
    std::string instrument;
    double tenor = 0.0;
    std::vector<double> moneyness;
    std::vector<double> vols;
};

enum class TradeStatus { Trade, Cancel, Correction, Reversal };

/// A trade report as read from trades.csv, before standardization.
struct RawTrade {
    std::string trade_id;
    std::string cusip;
    Date date;
    double price = 0.0;
    double coupon = 0.0;
    Date maturity;
    std::string volume;  // kept as text until the standardization step
    std::string status;
    std::string reversal_flag;
};

struct BondTrade {
    std::string trade_id;
    std::string cusip;
    Date date;
    double price = 0.0;  // full price, percent of par
    double coupon = 0.0;
    Date maturity;
    double volume = 0.0;  // dollar volume
    TradeStatus status = TradeStatus::Trade;
    bool reversal_flag = false;
};

struct TreasuryPoint {
    Date date;
    std::string instrument;
    double coupon = 0.0;
    double duration = 0.0;
    Date maturity;
    double yield = 0.0;
    double ret = 0.0;
};

struct FundObservation {
    Date date;
    double ret = 0.0;
    double duration = 0.0;
};

struct RosterEntry {
    Date effective_date;
    std::string cusip;
    Date inclusion_date;
};

struct CleanDiagnostics {
    std::size_t input_records = 0;
    std::size_t rejected = 0;          // unparseable status / volume
    std::size_t cancellations = 0;     // cancel records matched to an original
    std::size_t corrections = 0;       // correction records matched to an original
    std::size_t reversals = 0;
    std::size_t orphans = 0;           // cancel/correction with no original found
    std::vector<std::string> messages;
};

struct CleanTradeSet {
    std::vector<BondTrade> trades;  // sorted by (cusip, date, trade_id)
    CleanDiagnostics diagnostics;
};

std::optional<TradeStatus> parse_trade_status(std::string_view code);
std::string_view trade_status_code(TradeStatus status);

/// Full four-step cleaning: standardize raw reports, then drop same-day
/// cancellations, corrections (with the reports they correct) and reversals.
CleanTradeSet clean_trace(std::span<const RawTrade> raw);

/// Steps 2-4 on already standardized records. Idempotent.
CleanTradeSet clean_trace(std::span<const BondTrade> trades);

// Bond arithmetic: semiannual compounding, act/365 year fractions, coupons
// every half year counted back from maturity, price = full price per 100 par.

double bond_price(double ytm, double coupon, const Date& settle, const Date& maturity);

/// Yield to maturity from a full price. Throws NumericalError on failure.
double bond_ytm(double price, double coupon, const Date& settle, const Date& maturity);

double bond_modified_duration(double ytm, double coupon, const Date& settle, const Date& maturity);

/// Treasury closest in maturity, ties broken by closest coupon.
const TreasuryPoint& match_treasury(const BondTrade& trade, std::span<const TreasuryPoint> curve);

/// Traded YTM minus the matched treasury's yield.
double compute_spread(const BondTrade& trade, std::span<const TreasuryPoint> curve);

struct DatasetPaths {
    std::filesystem::path prices;
    std::filesystem::path smiles;
    std::filesystem::path trades;
    std::filesystem::path treasuries;
    std::filesystem::path fund_returns;
    std::filesystem::path roster;

    /// Standard file names inside `dir`; files that do not exist are left empty.
    static DatasetPaths in_directory(const std::filesystem::path& dir);
};

struct DatasetSchema {
    /// Largest fraction of a series' dates that may be dropped when aligning
    /// to the common business-day calendar.
    double max_misaligned_fraction = 0.05;
};

struct GapRecord {
    std::string source;  // "prices:LQD", "treasuries:T5", ...
    Date date;
};

/// Date-aligned, immutable market data. prices / treasuries / funds hold one
/// entry per element of `dates`; smiles, trades and roster are event data.
struct MarketDataset {
    std::vector<Date> dates;
    std::map<std::string, std::vector<PriceBar>> prices;
    std::map<std::string, std::vector<TreasuryPoint>> treasuries;
    std::map<std::string, std::vector<FundObservation>> funds;
    std::map<std::string, std::vector<VolSmile>> smiles;
    std::vector<RawTrade> trades;
    std::vector<RosterEntry> roster;
    std::set<std::string> instruments_without_quotes;
    bool cost_model_enabled = true;
    std::vector<GapRecord> gaps;

    std::optional<std::size_t> index_of(const Date& d) const;

    /// Copy restricted to dates <= last (event data filtered the same way).
    MarketDataset truncated(const Date& last) const;
};

MarketDataset load_dataset(const DatasetPaths& paths, const DatasetSchema& schema = {});

/// Writes the CSV bundle (standard file names) into `dir`.
void write_dataset(const MarketDataset& data, const std::filesystem::path& dir);

}  // namespace credhedge
