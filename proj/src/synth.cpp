#include "credhedge/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

namespace credhedge {
namespace {

Date add_years(const Date& d, int years) {
    Date out = (d.year() + std::chrono::years{years}) / d.month() / d.day();
    if (!out.ok()) out = out.year() / out.month() / std::chrono::last;
    return out;
}

struct TreasurySpec {
    const char* id;
    int tenor_years;
    double duration;
};

constexpr std::array<TreasurySpec, 5> kTreasuries{{
    {"T2", 2, 1.95},
    {"T5", 5, 4.6},
    {"T7", 7, 6.3},
    {"T10", 10, 8.7},
    {"T20", 20, 14.5},
}};

constexpr double kCurveSlope = 0.001;  // yield per year of duration

/// Stress intensity of one window on day t (0 outside the episode).
double window_stress(const PlantedWindow& w, int t) {
    const double amplitude = w.spread_multiplier - 1.0;
    const int ramp_start = w.start - w.lead_days;
    const int last = w.start + w.length - 1;
    if (t < ramp_start) return 0.0;
    if (t < w.start) return amplitude * static_cast<double>(t - ramp_start + 1) / static_cast<double>(w.lead_days + 1);
    if (t <= last) return amplitude;
    return amplitude * std::exp(-static_cast<double>(t - last) * std::log(2.0) / 5.0);
}

std::string cusip_for(int j) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "SYN%06d", j + 1);
    return buf;
}

}  // namespace

SynthConfig SynthConfig::planted_regime() {
    SynthConfig c;
    c.days = 1500;
    c.windows = {
        PlantedWindow{895, 8, 0.06, 3.0, 5},     // rallies with stressed signals
        PlantedWindow{945, 8, 0.06, 3.0, 5},
        PlantedWindow{995, 8, 0.06, 3.0, 5},
        PlantedWindow{1045, 8, 0.06, 3.0, 5},
        PlantedWindow{1095, 8, 0.14, 3.5, 5},
        PlantedWindow{1115, 8, -0.08, 3.0, 5},   // precursor drawdown
        PlantedWindow{1135, 6, 0.06, 2.5, 5},    // rally with stressed signals
        PlantedWindow{1150, 20, -0.15, 15.0, 3},  // main drawdown
        PlantedWindow{1185, 30, 0.08, 1.0, 5},    // unstressed recovery
    };
    return c;
}

void SynthConfig::validate() const {
    if (days < 30) throw DataError("synthetic horizon must span at least 30 days");
    if (hedges.empty()) throw DataError("synthetic market needs at least one hedge instrument");
    if (bonds < 1) throw DataError("synthetic market needs at least one bond");
    for (const auto& w : windows) {
        if (w.length < 1 || w.lead_days < 0) throw DataError("planted window needs length >= 1 and lead_days >= 0");
        if (w.start - w.lead_days < 1 || w.start + w.length > days) {
            throw DataError("planted window starting at day " + std::to_string(w.start) + " lies outside the horizon");
        }
        if (!(w.depth > -1.0)) throw DataError("planted window depth must exceed -100%");
        if (!(w.spread_multiplier >= 1.0)) throw DataError("planted window spread multiplier must be >= 1");
    }
}

MarketDataset generate_synthetic_market(const SynthConfig& config, std::uint64_t seed) {
    config.validate();
    const int T = config.days;
    const auto uT = static_cast<std::size_t>(T);

    std::mt19937_64 market_rng(seed);
    std::mt19937_64 smile_rng(seed ^ 0x5bd1e995ULL);
    std::mt19937_64 trade_rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    MarketDataset data;
    Date day = config.start_date;
    if (!is_weekday(day)) day = next_business_day(day);
    for (int t = 0; t < T; ++t) {
        data.dates.push_back(day);
        day = next_business_day(day);
    }

    // Stress level and planted hedge move per day.
    std::vector<double> stress(uT, 0.0);
    std::vector<double> planted(uT, 0.0);
    for (const auto& w : config.windows) {
        const double daily = std::pow(1.0 + w.depth, 1.0 / w.length) - 1.0;
        for (int t = 0; t < T; ++t) {
            stress[static_cast<std::size_t>(t)] += window_stress(w, t);
            if (t >= w.start && t < w.start + w.length) planted[static_cast<std::size_t>(t)] += daily;
        }
    }

    // Treasury curve: parallel random walk plus a fixed slope in duration, so
    // every treasury return is linear in duration on a given day.
    std::vector<double> level(uT, config.base_yield);
    for (std::size_t t = 1; t < uT; ++t) level[t] = level[t - 1] + config.yield_vol * gauss(market_rng);
    auto tsy_yield = [&](std::size_t t, double duration) { return level[t] + kCurveSlope * duration; };
    auto tsy_return = [&](std::size_t t, double duration) {
        if (t == 0) return 0.0;
        return tsy_yield(t - 1, duration) / kTradingDaysPerYear -
               duration * (tsy_yield(t, duration) - tsy_yield(t - 1, duration));
    };

    for (const auto& spec : kTreasuries) {
        auto& points = data.treasuries[spec.id];
        for (std::size_t t = 0; t < uT; ++t) {
            const double y = tsy_yield(t, spec.duration);
            points.push_back(TreasuryPoint{data.dates[t], spec.id, std::round(y * 800.0) / 800.0, spec.duration,
                                           add_years(data.dates[t], spec.tenor_years), y, tsy_return(t, spec.duration)});
        }
    }

    // Duration-neutral return components.
    std::vector<double> common(uT, 0.0);
    for (std::size_t t = 1; t < uT; ++t) common[t] = config.common_vol * gauss(market_rng);

    auto add_instrument = [&](const std::string& id, double duration, double dividend_yield,
                              const std::vector<double>& neutral, double half_spread, double volume_scale) {
        auto& bars = data.prices[id];
        double close = config.base_price;
        for (std::size_t t = 0; t < uT; ++t) {
            if (t > 0) {
                const double total = neutral[t] + tsy_return(t, duration);
                close *= 1.0 + total - dividend_yield / kTradingDaysPerYear;
            }
            const double hs = half_spread * (1.0 + 0.5 * stress[t]);
            const double volume = std::round(config.base_volume * volume_scale * (1.0 + 0.25 * stress[t]) *
                                             std::exp(0.2 * gauss(market_rng) - 0.02));
            bars.push_back(PriceBar{data.dates[t], close, close * (1.0 - hs), close * (1.0 + hs), volume, duration,
                                    dividend_yield});
        }
    };

    for (std::size_t k = 0; k < config.hedges.size(); ++k) {
        const double beta = 1.0 + 0.5 * static_cast<double>(k);
        std::vector<double> neutral(uT, 0.0);
        for (std::size_t t = 1; t < uT; ++t) {
            neutral[t] = beta * (common[t] + planted[t]) + config.hedge_idio_vol * gauss(market_rng) +
                         config.hedge_carry / kTradingDaysPerYear;
        }
        const double duration = k == 0 ? config.hedge_duration : std::max(3.0, config.hedge_duration - 4.0);
        add_instrument(config.hedges[k], duration, 0.035 + 0.015 * static_cast<double>(k), neutral,
                       config.half_spread * (1.0 + static_cast<double>(k)), 1.0 / (1.0 + static_cast<double>(k)));
    }
    {
        std::vector<double> neutral(uT, 0.0);
        for (std::size_t t = 1; t < uT; ++t) neutral[t] = 0.00005 * gauss(market_rng);
        add_instrument(config.rates_etf, config.rates_duration, 0.02, neutral, config.half_spread, 1.0);
    }
    {
        auto& obs = data.funds[config.fund];
        for (std::size_t t = 0; t < uT; ++t) {
            double neutral = 0.0;
            if (t > 0) {
                neutral = config.fund_beta * common[t] + config.fund_stress_share * planted[t] +
                          config.fund_idio_vol * gauss(market_rng) + config.fund_carry / kTradingDaysPerYear;
            }
            obs.push_back(FundObservation{data.dates[t], neutral + tsy_return(t, config.fund_duration),
                                          config.fund_duration});
        }
    }

    // Option smiles: flat wings beyond 75% / 125% moneyness, downside skew
    // steepening with stress for the credit ETF.
    auto add_smiles = [&](const std::string& id, double atm, double skew, double curvature, double stress_atm,
                          double stress_skew) {
        auto& list = data.smiles[id];
        for (std::size_t t = 0; t < uT; ++t) {
            VolSmile s;
            s.date = data.dates[t];
            s.instrument = id;
            s.tenor = config.smile_tenor;
            const double a = atm + stress_atm * stress[t] + 0.001 * gauss(smile_rng);
            const double k = skew + stress_skew * stress[t] + 0.0005 * gauss(smile_rng);
            for (int m = 60; m <= 140; m += 5) {
                const double x = std::clamp(static_cast<double>(m), 75.0, 125.0);
                const double u = (100.0 - x) / 25.0;
                s.moneyness.push_back(m);
                s.vols.push_back(std::max(0.01, a + k * u + curvature * u * u));
            }
            list.push_back(std::move(s));
        }
    };
    add_smiles(config.hedges.front(), 0.07, 0.015, 0.01, 0.01, 0.008);
    add_smiles(config.rates_etf, 0.06, 0.004, 0.005, 0.0, 0.0);

    // Bond universe, index roster and trade reports.
    struct Bond {
        std::string cusip;
        double coupon;
        Date maturity;
        double spread;
        Date inclusion;
    };
    const Date first = data.dates.front();
    const Date last = data.dates.back();
    const auto span_days = days_between(first, last) + 700;
    std::vector<Bond> bonds;
    for (int j = 0; j < config.bonds; ++j) {
        bonds.push_back(Bond{cusip_for(j), 0.03 + 0.005 * (j % 5), add_years(last, 1 + (j * 7) % 15),
                             0.008 + 0.0005 * (j % 9),
                             add_days(first, -700 + span_days * j / config.bonds)});
    }
    for (std::size_t t = 0; t < uT; t += 63) {
        for (const auto& b : bonds) {
            if (b.inclusion <= data.dates[t]) data.roster.push_back(RosterEntry{data.dates[t], b.cusip, b.inclusion});
        }
    }

    std::vector<TreasuryPoint> curve;
    std::size_t next_id = 1;
    auto new_id = [&]() { return "S" + std::to_string(next_id++); };
    for (std::size_t t = 0; t < uT; ++t) {
        curve.clear();
        for (const auto& [id, pts] : data.treasuries) curve.push_back(pts[t]);
        const double spread_factor = 1.0 + stress[t];
        for (std::size_t j = 0; j < bonds.size(); ++j) {
            const auto& b = bonds[j];
            if (b.inclusion > data.dates[t]) continue;
            if (uniform(trade_rng) >= config.trade_probability) continue;
            BondTrade probe;
            probe.date = data.dates[t];
            probe.maturity = b.maturity;
            probe.coupon = b.coupon;
            const double ytm =
                match_treasury(probe, curve).yield + b.spread * spread_factor * (1.0 + 0.03 * gauss(trade_rng));
            RawTrade trade;
            trade.trade_id = new_id();
            trade.cusip = b.cusip;
            trade.date = data.dates[t];
            trade.price = bond_price(ytm, b.coupon, trade.date, b.maturity);
            trade.coupon = b.coupon;
            trade.maturity = b.maturity;
            const double dollars = 250000.0 * static_cast<double>(1 + j % 4) * std::exp(0.5 * gauss(trade_rng));
            trade.volume = dollars >= 5e6 ? "5MM+" : std::to_string(static_cast<long long>(std::round(dollars)));
            trade.status = "T";
            data.trades.push_back(trade);

            const double u = uniform(trade_rng);
            if (u < config.cancel_probability) {
                RawTrade cancel = trade;
                cancel.trade_id = new_id();
                cancel.status = "X";
                data.trades.push_back(cancel);
            } else if (u < config.cancel_probability + config.correction_probability) {
                RawTrade correction = trade;
                correction.trade_id = new_id();
                correction.status = "C";
                correction.price = trade.price * 1.001;
                data.trades.push_back(correction);
            }
        }
    }
    return data;
}

}  // namespace credhedge
