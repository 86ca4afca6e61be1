#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "credhedge/marketdata.hpp"
#include "support.hpp"

using namespace credhedge;
using credhedge::testing::business_days;
using credhedge::testing::TempDir;
using credhedge::testing::ymd;

namespace {

BondTrade trade(std::string id, std::string cusip, Date date, double price, double volume,
                TradeStatus status = TradeStatus::Trade, bool reversal = false) {
    return BondTrade{std::move(id), std::move(cusip), date, price, 0.04, ymd(2030, 6, 15), volume, status, reversal};
}

// Quadratic reference: each cancel/correction scans every earlier record for
// the first still-live original with the same cusip, date and volume (and
// price, for cancels).
std::vector<std::string> brute_force_survivors(const std::vector<BondTrade>& in) {
    std::vector<bool> gone(in.size(), false);
    for (TradeStatus pass : {TradeStatus::Cancel, TradeStatus::Correction}) {
        for (std::size_t j = 0; j < in.size(); ++j) {
            if (in[j].status != pass) continue;
            gone[j] = true;
            for (std::size_t i = 0; i < j; ++i) {
                const auto& a = in[i];
                const auto& b = in[j];
                if (gone[i] || a.status != TradeStatus::Trade) continue;
                if (a.cusip != b.cusip || a.date != b.date || a.volume != b.volume) continue;
                if (pass == TradeStatus::Cancel && a.price != b.price) continue;
                gone[i] = true;
                break;
            }
        }
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const bool reversal = in[i].status == TradeStatus::Reversal && in[i].reversal_flag;
        if (!gone[i] && !reversal) out.push_back(in[i].trade_id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> ids_of(const CleanTradeSet& s) {
    std::vector<std::string> out;
    for (const auto& t : s.trades) out.push_back(t.trade_id);
    std::sort(out.begin(), out.end());
    return out;
}

// 82 originals, 10 cancels, 5 corrections and 3 reversals.
std::vector<BondTrade> hundred_record_tape() {
    std::vector<BondTrade> tape;
    const auto days = business_days(ymd(2021, 3, 1), 5);
    for (int i = 0; i < 82; ++i) {
        tape.push_back(trade("T" + std::to_string(i), "C" + std::to_string(i % 7), days[i % 5], 99.0 + 0.01 * i,
                             1000.0 * (i + 1)));
    }
    for (int k = 0; k < 10; ++k) {
        const auto& o = tape[static_cast<std::size_t>(3 * k)];
        tape.push_back(trade("X" + std::to_string(k), o.cusip, o.date, o.price, o.volume, TradeStatus::Cancel));
    }
    for (int k = 0; k < 5; ++k) {
        const auto& o = tape[static_cast<std::size_t>(40 + 2 * k)];
        tape.push_back(trade("K" + std::to_string(k), o.cusip, o.date, o.price + 0.25, o.volume,
                             TradeStatus::Correction));
    }
    for (int k = 0; k < 3; ++k) {
        tape.push_back(trade("R" + std::to_string(k), "C0", days[0], 100.0, 5e5 + k, TradeStatus::Reversal, true));
    }
    return tape;
}

std::string price_rows(const std::vector<Date>& days, bool quotes) {
    std::string out = "date,instrument,close,bid,ask,volume,duration,dividend_yield\n";
    for (std::size_t t = 0; t < days.size(); ++t) {
        for (const char* id : {"IEF", "LQD"}) {
            const double close = 100.0 + static_cast<double>(t);
            out += format_date(days[t]) + "," + id + "," + std::to_string(close) + ",";
            if (quotes) out += std::to_string(close - 0.01) + "," + std::to_string(close + 0.01);
            else out += ",";
            out += ",1000000,7.5,0\n";
        }
    }
    return out;
}

}  // namespace

TEST(CleanTrace, HundredRecordTapeLeavesSixtySeven) {
    const auto tape = hundred_record_tape();
    ASSERT_EQ(tape.size(), 100u);
    const auto clean = clean_trace(std::span<const BondTrade>(tape));
    EXPECT_EQ(clean.trades.size(), 67u);
    EXPECT_EQ(ids_of(clean), brute_force_survivors(tape));
    EXPECT_EQ(clean.diagnostics.cancellations, 10u);
    EXPECT_EQ(clean.diagnostics.corrections, 5u);
    EXPECT_EQ(clean.diagnostics.reversals, 3u);
    EXPECT_EQ(clean.diagnostics.orphans, 0u);
}

TEST(CleanTrace, MatchesBruteForceOnRandomTapes) {
    std::mt19937_64 rng(3);
    const auto days = business_days(ymd(2021, 3, 1), 3);
    std::uniform_int_distribution<int> small(0, 2);
    std::uniform_int_distribution<int> status(0, 9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<BondTrade> tape;
        for (int i = 0; i < 40; ++i) {
            const int s = status(rng);
            const TradeStatus st = s < 6 ? TradeStatus::Trade
                                   : s < 8 ? TradeStatus::Cancel
                                   : s < 9 ? TradeStatus::Correction
                                           : TradeStatus::Reversal;
            tape.push_back(trade("id" + std::to_string(i), "C" + std::to_string(small(rng)),
                                 days[static_cast<std::size_t>(small(rng))], 100.0 + small(rng),
                                 1000.0 * (1 + small(rng)), st, small(rng) != 0));
        }
        EXPECT_EQ(ids_of(clean_trace(std::span<const BondTrade>(tape))), brute_force_survivors(tape)) << trial;
    }
}

TEST(CleanTrace, IsIdempotent) {
    const auto once = clean_trace(std::span<const BondTrade>(hundred_record_tape()));
    const auto twice = clean_trace(std::span<const BondTrade>(once.trades));
    EXPECT_EQ(ids_of(twice), ids_of(once));
    EXPECT_EQ(twice.diagnostics.cancellations + twice.diagnostics.corrections + twice.diagnostics.reversals, 0u);
}

TEST(CleanTrace, SameDayCancelRemovesBothRecords) {
    const Date d = ymd(2021, 3, 1);
    const std::vector<BondTrade> tape{trade("a", "C1", d, 101.0, 5000.0),
                                      trade("b", "C1", d, 101.0, 5000.0, TradeStatus::Cancel),
                                      trade("c", "C1", d, 101.5, 5000.0)};
    const auto clean = clean_trace(std::span<const BondTrade>(tape));
    ASSERT_EQ(clean.trades.size(), 1u);
    EXPECT_EQ(clean.trades[0].trade_id, "c");
}

TEST(CleanTrace, CancelOnAnotherDayIsAnOrphan) {
    const std::vector<BondTrade> tape{trade("a", "C1", ymd(2021, 3, 1), 101.0, 5000.0),
                                      trade("b", "C1", ymd(2021, 3, 2), 101.0, 5000.0, TradeStatus::Cancel)};
    const auto clean = clean_trace(std::span<const BondTrade>(tape));
    ASSERT_EQ(clean.trades.size(), 1u);
    EXPECT_EQ(clean.diagnostics.orphans, 1u);
}

TEST(CleanTrace, RawReportsAreStandardized) {
    const Date d = ymd(2021, 3, 1);
    const std::vector<RawTrade> raw{
        {"a", "C1", d, 101.0, 0.04, ymd(2030, 1, 1), "5MM+", "T", ""},
        {"b", "C1", d, 101.0, 0.04, ymd(2030, 1, 1), "abc", "T", ""},
        {"c", "C1", d, 101.0, 0.04, ymd(2030, 1, 1), "1000", "Q", ""},
        {"d", "C1", d, 101.0, 0.04, ymd(2030, 1, 1), "2000", "Y", "N"},
    };
    const auto clean = clean_trace(std::span<const RawTrade>(raw));
    EXPECT_EQ(clean.diagnostics.input_records, 4u);
    EXPECT_EQ(clean.diagnostics.rejected, 2u);
    ASSERT_EQ(clean.trades.size(), 2u);
    EXPECT_EQ(clean.trades[0].volume, 5e6);
    EXPECT_EQ(clean.trades[1].status, TradeStatus::Reversal);
}

TEST(BondMath, ParBondOnCouponDateYieldsItsCoupon) {
    const Date settle = ymd(2020, 1, 15);
    const Date maturity = add_days(settle, 1825);  // exactly five act/365 years
    EXPECT_NEAR(bond_price(0.04, 0.04, settle, maturity), 100.0, 1e-10);
    EXPECT_NEAR(bond_ytm(100.0, 0.04, settle, maturity), 0.04, 1e-12);
}

TEST(BondMath, YieldRoundTrip) {
    const Date settle = ymd(2020, 1, 15);
    const Date maturity = add_days(settle, 1825);
    const double price = bond_price(0.045, 0.04, settle, maturity);
    // Closed-form annuity at a 2.25% half-year rate over ten periods.
    const double v = 1.0 / 1.0225;
    const double oracle = 2.0 * (1.0 - std::pow(v, 10)) / 0.0225 + 100.0 * std::pow(v, 10);
    EXPECT_NEAR(price, oracle, 1e-10);
    EXPECT_NEAR(bond_ytm(price, 0.04, settle, maturity), 0.045, 1e-8);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> y(-0.01, 0.15), c(0.0, 0.09);
    std::uniform_int_distribution<int> days(40, 30 * 365);
    for (int i = 0; i < 200; ++i) {
        const double yield = y(rng), coupon = c(rng);
        const Date m = add_days(settle, days(rng));
        EXPECT_NEAR(bond_ytm(bond_price(yield, coupon, settle, m), coupon, settle, m), yield, 1e-8);
    }
}

TEST(BondMath, ModifiedDurationMatchesPriceSensitivity) {
    const Date settle = ymd(2020, 1, 15);
    const Date maturity = ymd(2027, 9, 1);
    const double y = 0.05, h = 1e-6;
    const double p = bond_price(y, 0.035, settle, maturity);
    const double dp = (bond_price(y + h, 0.035, settle, maturity) - bond_price(y - h, 0.035, settle, maturity)) / (2 * h);
    EXPECT_NEAR(bond_modified_duration(y, 0.035, settle, maturity), -dp / p, 1e-6);
}

TEST(BondMath, SpreadOverMatchedTreasury) {
    const Date settle = ymd(2020, 1, 15);
    const Date maturity = add_days(settle, 1825);
    auto t = trade("a", "C1", settle, bond_price(0.05, 0.04, settle, maturity), 1e6);
    t.maturity = maturity;
    const std::vector<TreasuryPoint> curve{
        {settle, "T2", 0.02, 1.9, add_days(settle, 730), 0.025, 0.0},
        {settle, "T5", 0.03, 4.6, add_days(settle, 1830), 0.03, 0.0},
        {settle, "T10", 0.035, 8.7, add_days(settle, 3650), 0.035, 0.0},
    };
    EXPECT_EQ(match_treasury(t, curve).instrument, "T5");
    EXPECT_NEAR(compute_spread(t, curve), 0.02, 1e-10);
}

TEST(BondMath, TreasuryTieBrokenByCoupon) {
    const Date settle = ymd(2020, 1, 15);
    auto t = trade("a", "C1", settle, 100.0, 1e6);
    t.maturity = add_days(settle, 1000);
    const std::vector<TreasuryPoint> curve{
        {settle, "A", 0.01, 2.5, add_days(settle, 990), 0.02, 0.0},
        {settle, "B", 0.039, 2.5, add_days(settle, 1010), 0.02, 0.0},
    };
    EXPECT_EQ(match_treasury(t, curve).instrument, "B");
}

TEST(LoadDataset, AlignsTenDaysForTwoInstruments) {
    TempDir dir;
    const auto days = business_days(ymd(2022, 5, 2), 10);
    dir.write("prices.csv", price_rows(days, true));
    const auto data = load_dataset(DatasetPaths::in_directory(dir.path()));
    EXPECT_EQ(data.dates, days);
    ASSERT_EQ(data.prices.size(), 2u);
    EXPECT_EQ(data.prices.at("LQD").size(), 10u);
    EXPECT_DOUBLE_EQ(data.prices.at("LQD")[9].close, 109.0);
    EXPECT_TRUE(data.cost_model_enabled);
    EXPECT_EQ(data.index_of(days[4]), 4u);
    EXPECT_FALSE(data.index_of(ymd(2022, 5, 7)).has_value());
    const auto cut = data.truncated(days[5]);
    EXPECT_EQ(cut.dates.size(), 6u);
    EXPECT_EQ(cut.prices.at("IEF").size(), 6u);
}

TEST(LoadDataset, DuplicateDateIsRejected) {
    TempDir dir;
    const auto days = business_days(ymd(2022, 5, 2), 10);
    auto body = price_rows(days, true);
    body += format_date(days[3]) + ",LQD,100,99.9,100.1,1000,7.5,0\n";
    dir.write("prices.csv", body);
    EXPECT_THROW(load_dataset(DatasetPaths::in_directory(dir.path())), DataError);
}

TEST(LoadDataset, MissingQuotesDisableCostModel) {
    TempDir dir;
    dir.write("prices.csv", price_rows(business_days(ymd(2022, 5, 2), 10), false));
    const auto data = load_dataset(DatasetPaths::in_directory(dir.path()));
    EXPECT_FALSE(data.cost_model_enabled);
    EXPECT_EQ(data.instruments_without_quotes.count("LQD"), 1u);
}

TEST(LoadDataset, MissingPricesOrEmptyFileIsAnError) {
    TempDir dir;
    EXPECT_THROW(load_dataset(DatasetPaths::in_directory(dir.path())), DataError);
    dir.write("prices.csv", "date,instrument,close,bid,ask,volume,duration,dividend_yield\n");
    EXPECT_THROW(load_dataset(DatasetPaths::in_directory(dir.path())), DataError);
}

TEST(LoadDataset, WriteThenLoadRoundTrips) {
    TempDir src;
    const auto days = business_days(ymd(2022, 5, 2), 10);
    src.write("prices.csv", price_rows(days, true));
    const auto data = load_dataset(DatasetPaths::in_directory(src.path()));
    TempDir dst;
    write_dataset(data, dst.path());
    const auto again = load_dataset(DatasetPaths::in_directory(dst.path()));
    EXPECT_EQ(again.dates, data.dates);
    for (const auto& [id, bars] : data.prices) {
        for (std::size_t t = 0; t < bars.size(); ++t) {
            EXPECT_EQ(again.prices.at(id)[t].close, bars[t].close);
            EXPECT_EQ(again.prices.at(id)[t].bid, bars[t].bid);
        }
    }
}
