#include "credhedge/durneutral.hpp"

#include <algorithm>
#include <cmath>

#include "credhedge/io.hpp"

namespace credhedge {

double DurationBracket::weight_of(const std::string& id) const {
    double w = 0.0;
    if (id == lower_id) w += w_lower;
    if (id == upper_id) w += w_upper;
    return w;
}

DurationBracket bracket_treasuries(double target, std::span<const TreasuryDuration> universe) {
    if (universe.empty()) throw DataError("treasury universe is empty");

    const TreasuryDuration* above = nullptr;  // smallest duration > target
    const TreasuryDuration* below = nullptr;  // largest duration < target
    const TreasuryDuration* exact = nullptr;
    for (const auto& t : universe) {
        if (t.duration == target) {
            if (!exact || t.id < exact->id) exact = &t;
        } else if (t.duration > target) {
            if (!above || t.duration < above->duration || (t.duration == above->duration && t.id < above->id)) {
                above = &t;
            }
        } else {
            if (!below || t.duration > below->duration || (t.duration == below->duration && t.id < below->id)) {
                below = &t;
            }
        }
    }

    if (exact) {
        return DurationBracket{exact->id, exact->id, exact->duration, exact->duration, 1.0, 0.0};
    }
    if (!above || !below) {
        throw DataError("duration " + io::format_double(target) + " is outside the treasury universe span");
    }
    DurationBracket b;
    b.lower_id = below->id;
    b.upper_id = above->id;
    b.d_lower = below->duration;
    b.d_upper = above->duration;
    b.w_upper = (target - b.d_lower) / (b.d_upper - b.d_lower);
    b.w_lower = 1.0 - b.w_upper;
    return b;
}

TreasuryPanel TreasuryPanel::from_dataset(const MarketDataset& data) {
    TreasuryPanel panel;
    panel.dates = data.dates;
    for (const auto& [id, points] : data.treasuries) {
        panel.ids.push_back(id);
        auto& d = panel.durations.emplace_back();
        auto& r = panel.returns.emplace_back();
        d.reserve(points.size());
        r.reserve(points.size());
        for (const auto& p : points) {
            d.push_back(p.duration);
            r.push_back(p.ret);
        }
    }
    return panel;
}

DurationNeutralSeries duration_neutral_returns(const AssetReturns& asset, const TreasuryPanel& treasuries) {
    if (asset.returns.size() != asset.dates.size() || asset.durations.size() != asset.dates.size()) {
        throw DataError("asset returns, durations and dates differ in length");
    }
    DurationNeutralSeries out;
    out.dates = asset.dates;
    out.raw_return = asset.returns;
    out.duration_return.resize(asset.dates.size());
    out.neutral_return.resize(asset.dates.size());

    std::vector<TreasuryDuration> universe(treasuries.ids.size());
    std::size_t cursor = 0;
    for (std::size_t t = 0; t < asset.dates.size(); ++t) {
        const Date& day = asset.dates[t];
        while (cursor < treasuries.dates.size() && treasuries.dates[cursor] < day) ++cursor;
        if (cursor == treasuries.dates.size() || treasuries.dates[cursor] != day) {
            throw DataError("treasury panel has no data on " + format_date(day));
        }
        for (std::size_t k = 0; k < treasuries.ids.size(); ++k) {
            universe[k] = {treasuries.ids[k], treasuries.durations[k][cursor]};
        }
        DurationBracket bracket;
        try {
            bracket = bracket_treasuries(asset.durations[t], universe);
        } catch (const DataError& e) {
            throw DataError(format_date(day) + ": " + e.what());
        }
        const auto lower = static_cast<std::size_t>(
            std::find(treasuries.ids.begin(), treasuries.ids.end(), bracket.lower_id) - treasuries.ids.begin());
        const auto upper = static_cast<std::size_t>(
            std::find(treasuries.ids.begin(), treasuries.ids.end(), bracket.upper_id) - treasuries.ids.begin());
        const double r_duration = bracket.w_lower * treasuries.returns[lower][cursor] +
                                  bracket.w_upper * treasuries.returns[upper][cursor];
        out.duration_return[t] = r_duration;
        out.neutral_return[t] = asset.returns[t] - r_duration;
    }
    return out;
}

}  // namespace credhedge
