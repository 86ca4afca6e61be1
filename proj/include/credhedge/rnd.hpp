#pragma once

#include <filesystem>
#include <vector>

#include "credhedge/core.hpp"
#include "credhedge/marketdata.hpp"

namespace credhedge {

inline constexpr double kDefaultFlatTolerance = 1e-6;

/// Implied vol as a function of moneyness (percent of spot): clamped cubic
/// spline between clamp_lo and clamp_hi, constant outside.
class VolCurve {
public:
    VolCurve() = default;
    VolCurve(Date date, double tenor, std::vector<double> knots, std::vector<double> values);

    double operator()(double moneyness_pct) const;

    /// First derivative of the spline (zero outside the clamps).
    double slope(double moneyness_pct) const;

    Date date() const { return date_; }
    double tenor() const { return tenor_; }
    double clamp_lo() const { return knots_.front(); }
    double clamp_hi() const { return knots_.back(); }
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& second_derivatives() const { return second_; }

private:
    std::size_t segment(double x) const;

    Date date_{};
    double tenor_ = 0.0;
    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> second_;
};

/// Finds the flat wings of the smile (consecutive vols equal within
/// flat_tolerance, scanning in from each end) and fits a zero-slope clamped
/// spline between them.
VolCurve fit_vol_curve(const VolSmile& smile, double flat_tolerance = kDefaultFlatTolerance);

/// Black-Scholes call with continuous dividend yield. sigma = 0 gives the
/// discounted intrinsic value.
double bs_call(double spot, double strike, double tenor, double r, double q, double sigma);

/// Uniform strike grid [lo, hi] with spacing step (currency units).
struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;

    /// Grid from lo_pct..hi_pct of spot with step_pct spacing (default 50..150, 0.5).
    static GridSpec relative(double spot, double lo_pct = 50.0, double hi_pct = 150.0, double step_pct = 0.5);
    std::size_t size() const;
};

struct RiskNeutralDistribution {
    Date date;
    double spot = 0.0;
    double r = 0.0;
    double q = 0.0;
    double tenor = 0.0;
    double step = 0.0;
    std::vector<double> strikes;
    std::vector<double> cdf;      // sanitized: non-decreasing, within [0, 1]
    std::vector<double> pdf;      // derivative of the sanitized cdf, >= 0
    std::vector<double> raw_cdf;  // finite-difference values before sanitizing
    std::vector<double> raw_pdf;

    /// Linear interpolation of the sanitized cdf (flat beyond the grid).
    double cdf_at(double strike) const;
};

RiskNeutralDistribution extract_distribution(const VolCurve& curve, double spot, double r, double q,
                                             const GridSpec& grid);

struct CreditRiskPoint {
    Date date;
    double threshold_drawdown = 0.0;        // d*, return relative to the rates-ETF spot (negative)
    double prob_exceeds = 0.0;              // P_credit(return <= d*)
    double excess_probability = 0.0;        // prob_exceeds - tail_prob
    double excess_expected_drawdown = 0.0;  // E_credit[(d* - d)+] - E_rates[(d* - d)+]
};

/// Compares the credit ETF distribution against the rates ETF distribution at
/// the rates ETF's tail_prob drawdown level.
CreditRiskPoint credit_signals(const RiskNeutralDistribution& credit, const RiskNeutralDistribution& rates,
                               double tail_prob = 0.01);

/// Dump as CSV: strike,cdf,pdf.
void write_distribution_csv(const RiskNeutralDistribution& dist, const std::filesystem::path& path);

}  // namespace credhedge
