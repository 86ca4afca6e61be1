#pragma once

#include <span>
#include <string>
#include <vector>

#include "credhedge/core.hpp"
#include "credhedge/marketdata.hpp"

namespace credhedge {

struct TreasuryDuration {
    std::string id;
    double duration = 0.0;
};

/// Two treasuries bounding a target duration, weighted to match it.
/// On an exact match both ids name the matching instrument and
/// w_lower = 1, w_upper = 0.
struct DurationBracket {
    std::string lower_id;
    std::string upper_id;
    double d_lower = 0.0;
    double d_upper = 0.0;
    double w_lower = 1.0;
    double w_upper = 0.0;

    double weight_of(const std::string& id) const;
};

DurationBracket bracket_treasuries(double target_duration, std::span<const TreasuryDuration> universe);

/// Daily returns plus the durations that go with them.
struct AssetReturns {
    std::vector<Date> dates;
    std::vector<double> returns;
    std::vector<double> durations;
};

/// Treasury universe aligned to a date axis: durations[k][t], returns[k][t]
/// for instrument ids[k].
struct TreasuryPanel {
    std::vector<Date> dates;
    std::vector<std::string> ids;
    std::vector<std::vector<double>> durations;
    std::vector<std::vector<double>> returns;

    static TreasuryPanel from_dataset(const MarketDataset& data);
};

struct DurationNeutralSeries {
    std::vector<Date> dates;
    std::vector<double> raw_return;
    std::vector<double> duration_return;
    std::vector<double> neutral_return;
};

/// Re-brackets every day and strips the duration-matched treasury return.
DurationNeutralSeries duration_neutral_returns(const AssetReturns& asset, const TreasuryPanel& treasuries);

}  // namespace credhedge
