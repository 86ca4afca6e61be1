#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "credhedge/core.hpp"
#include "credhedge/marketdata.hpp"

namespace credhedge {

/// A stress episode. Signals (bond spreads, the credit ETF's downside skew)
/// ramp up over lead_days before `start`, stay elevated for `length` days and
/// then decay. The hedge instruments move by `depth` in total over the
/// episode (negative: drawdown, positive: a rally that the signals do not
/// anticipate correctly).
struct PlantedWindow {
    int start = 0;  // business-day index
    int length = 20;
    double depth = -0.15;
    double spread_multiplier = 3.0;
    int lead_days = 5;
};

struct SynthConfig {
    Date start_date{std::chrono::year{2016}, std::chrono::month{1}, std::chrono::day{4}};
    int days = 1500;

    std::string fund = "FUND";
    std::vector<std::string> hedges{"LQD"};
    std::string rates_etf = "IEF";

    // Duration-neutral return model, daily decimals unless noted.
    double common_vol = 0.003;
    double hedge_idio_vol = 0.0003;
    double fund_idio_vol = 0.0004;
    double fund_beta = 0.7;         // fund loading on common credit noise
    double fund_stress_share = 0.35;  // fraction of the hedge's stress move borne by the fund
    double hedge_carry = 0.08;      // annual
    double fund_carry = 0.03;       // annual

    double hedge_duration = 8.5;
    double fund_duration = 6.0;
    double rates_duration = 7.5;
    double base_yield = 0.03;
    double yield_vol = 0.0004;

    double base_price = 100.0;
    double base_volume = 3e7;  // shares per day
    double half_spread = 1e-4;

    int bonds = 24;
    double trade_probability = 0.6;
    double cancel_probability = 0.02;
    double correction_probability = 0.01;

    double smile_tenor = 0.25;

    std::vector<PlantedWindow> windows;

    /// Stress layout used by the end-to-end checks: a -15% drawdown preceded
    /// by a smaller drawdown 35 days earlier, a mis-signalled rally 15 days
    /// earlier and a run of mis-signalled rallies further back, followed by
    /// an unstressed recovery. Only a 40-day fitting window sees the precursor
    /// without the older rallies.
    static SynthConfig planted_regime();

    /// Throws DataError when a window falls outside the horizon.
    void validate() const;
};

/// Deterministic function of (config, seed).
MarketDataset generate_synthetic_market(const SynthConfig& config, std::uint64_t seed);

}  // namespace credhedge
