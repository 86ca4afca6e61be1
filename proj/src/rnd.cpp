#include "credhedge/rnd.hpp"

#include <algorithm>
#include <cmath>

#include "credhedge/io.hpp"

namespace credhedge {

namespace {

constexpr double kMinVol = 1e-4;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Second derivatives of the clamped cubic spline (zero end slopes).
std::vector<double> clamped_second_derivatives(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> diag(n), upper(n, 0.0), lower(n, 0.0), rhs(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(x[i + 1] > x[i])) throw DataError("spline knots must be strictly increasing");
    }
    const double h0 = x[1] - x[0];
    diag[0] = 2.0 * h0;
    upper[0] = h0;
    rhs[0] = 6.0 * ((y[1] - y[0]) / h0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x[i] - x[i - 1];
        const double hr = x[i + 1] - x[i];
        lower[i] = hl;
        diag[i] = 2.0 * (hl + hr);
        upper[i] = hr;
        rhs[i] = 6.0 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
    }
    const double hn = x[n - 1] - x[n - 2];
    lower[n - 1] = hn;
    diag[n - 1] = 2.0 * hn;
    rhs[n - 1] = 6.0 * (-(y[n - 1] - y[n - 2]) / hn);

    // Thomas algorithm; the system is strictly diagonally dominant.
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    return m;
}

}  // namespace

VolCurve::VolCurve(Date date, double tenor, std::vector<double> knots, std::vector<double> values)
    : date_(date), tenor_(tenor), knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size()) throw DataError("vol curve needs matching knots/values");
    second_ = clamped_second_derivatives(knots_, values_);
}

std::size_t VolCurve::segment(double x) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - knots_.begin());
    i = i == 0 ? 0 : i - 1;
    return std::min(i, knots_.size() - 2);
}

double VolCurve::operator()(double x) const {
    if (knots_.size() == 1 || x <= knots_.front()) return std::max(values_.front(), kMinVol);
    if (x >= knots_.back()) return std::max(values_.back(), kMinVol);
    const std::size_t i = segment(x);
    const double h = knots_[i + 1] - knots_[i];
    const double a = knots_[i + 1] - x;
    const double b = x - knots_[i];
    const double v = second_[i] * a * a * a / (6.0 * h) + second_[i + 1] * b * b * b / (6.0 * h) +
                     (values_[i] / h - second_[i] * h / 6.0) * a + (values_[i + 1] / h - second_[i + 1] * h / 6.0) * b;
    return std::max(v, kMinVol);
}

double VolCurve::slope(double x) const {
    if (knots_.size() == 1 || x <= knots_.front() || x >= knots_.back()) return 0.0;
    const std::size_t i = segment(x);
    const double h = knots_[i + 1] - knots_[i];
    const double a = knots_[i + 1] - x;
    const double b = x - knots_[i];
    return -second_[i] * a * a / (2.0 * h) + second_[i + 1] * b * b / (2.0 * h) -
           (values_[i] / h - second_[i] * h / 6.0) + (values_[i + 1] / h - second_[i + 1] * h / 6.0);
}

VolCurve fit_vol_curve(const VolSmile& smile, double flat_tolerance) {
    const auto& m = smile.moneyness;
    const auto& v = smile.vols;
    if (m.size() != v.size()) throw DataError("smile moneyness and vol counts differ");
    if (m.size() < 5) {
        throw DataError("smile on " + format_date(smile.date) + " has " + std::to_string(m.size()) +
                        " points; at least 5 required");
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i > 0 && !(m[i] > m[i - 1])) {
            throw DataError("smile on " + format_date(smile.date) + ": moneyness grid not strictly increasing");
        }
        if (!(v[i] > 0.0)) throw DataError("smile on " + format_date(smile.date) + ": non-positive vol");
    }

    std::size_t lo = 0;
    while (lo + 1 < v.size() && std::abs(v[lo + 1] - v[lo]) <= flat_tolerance) ++lo;
    std::size_t hi = v.size() - 1;
    while (hi > 0 && std::abs(v[hi - 1] - v[hi]) <= flat_tolerance) --hi;
    if (lo >= hi) {
        // Flat everywhere: clamps at the grid extremes.
        lo = 0;
        hi = v.size() - 1;
    }
    std::vector<double> knots(m.begin() + static_cast<std::ptrdiff_t>(lo), m.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    std::vector<double> values(v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    return VolCurve(smile.date, smile.tenor, std::move(knots), std::move(values));
}

double bs_call(double spot, double strike, double tenor, double r, double q, double sigma) {
    if (!(spot > 0.0) || !(strike > 0.0)) throw DataError("bs_call: spot and strike must be positive");
    if (!(tenor > 0.0)) throw DataError("bs_call: tenor must be positive");
    if (sigma < 0.0) throw DataError("bs_call: sigma must be non-negative");
    const double fwd_spot = spot * std::exp(-q * tenor);
    const double pv_strike = strike * std::exp(-r * tenor);
    if (sigma == 0.0) return std::max(fwd_spot - pv_strike, 0.0);
    const double vol_sqrt_t = sigma * std::sqrt(tenor);
    const double d1 = (std::log(spot / strike) + (r - q + 0.5 * sigma * sigma) * tenor) / vol_sqrt_t;
    const double d2 = d1 - vol_sqrt_t;
    return fwd_spot * normal_cdf(d1) - pv_strike * normal_cdf(d2);
}

GridSpec GridSpec::relative(double spot, double lo_pct, double hi_pct, double step_pct) {
    return GridSpec{spot * lo_pct / 100.0, spot * hi_pct / 100.0, spot * step_pct / 100.0};
}

std::size_t GridSpec::size() const {
    if (!(step > 0.0) || !(hi > lo)) return 0;
    return static_cast<std::size_t>(std::llround((hi - lo) / step)) + 1;
}

double RiskNeutralDistribution::cdf_at(double strike) const {
    if (strike <= strikes.front()) return cdf.front();
    if (strike >= strikes.back()) return cdf.back();
    const auto it = std::upper_bound(strikes.begin(), strikes.end(), strike);
    const std::size_t j = static_cast<std::size_t>(it - strikes.begin());
    const double theta = (strike - strikes[j - 1]) / (strikes[j] - strikes[j - 1]);
    return cdf[j - 1] + theta * (cdf[j] - cdf[j - 1]);
}

RiskNeutralDistribution extract_distribution(const VolCurve& curve, double spot, double r, double q,
                                             const GridSpec& grid) {
    if (!(grid.lo > 0.0)) throw DataError("strike grid must start above zero");
    const std::size_t n = grid.size();
    if (n < 10) throw DataError("strike grid too coarse: " + std::to_string(n) + " points (need >= 10)");

    RiskNeutralDistribution d;
    d.date = curve.date();
    d.spot = spot;
    d.r = r;
    d.q = q;
    d.tenor = curve.tenor();
    d.step = grid.step;
    d.strikes.resize(n);
    std::vector<double> call(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = grid.lo + static_cast<double>(j) * grid.step;
        d.strikes[j] = x;
        call[j] = bs_call(spot, x, d.tenor, r, q, curve(100.0 * x / spot));
    }

    const double growth = std::exp(r * d.tenor);
    const double h = grid.step;
    d.raw_cdf.resize(n);
    d.raw_pdf.resize(n);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        if (j >= 2 && j + 2 < n) {
            // Five-point stencil for dC/dX.
            d.raw_cdf[j] = 1.0 + growth * (-call[j + 2] + 8.0 * call[j + 1] - 8.0 * call[j - 1] + call[j - 2]) /
                                     (12.0 * h);
        } else {
            d.raw_cdf[j] = 1.0 + growth * (call[j + 1] - call[j - 1]) / (2.0 * h);
        }
        d.raw_pdf[j] = growth * (call[j + 1] - 2.0 * call[j] + call[j - 1]) / (h * h);
    }
    d.raw_cdf[0] = 1.0 + growth * (-3.0 * call[0] + 4.0 * call[1] - call[2]) / (2.0 * h);
    d.raw_pdf[0] = growth * (2.0 * call[0] - 5.0 * call[1] + 4.0 * call[2] - call[3]) / (h * h);
    const std::size_t e = n - 1;
    d.raw_cdf[e] = 1.0 + growth * (3.0 * call[e] - 4.0 * call[e - 1] + call[e - 2]) / (2.0 * h);
    d.raw_pdf[e] = growth * (2.0 * call[e] - 5.0 * call[e - 1] + 4.0 * call[e - 2] - call[e - 3]) / (h * h);

    // Sanitize: running maximum, then clip into [0, 1].
    d.cdf.resize(n);
    double running = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        running = std::max(running, d.raw_cdf[j]);
        d.cdf[j] = std::clamp(running, 0.0, 1.0);
    }
    d.pdf.resize(n);
    for (std::size_t j = 1; j + 1 < n; ++j) d.pdf[j] = (d.cdf[j + 1] - d.cdf[j - 1]) / (2.0 * h);
    d.pdf[0] = (d.cdf[1] - d.cdf[0]) / h;
    d.pdf[e] = (d.cdf[e] - d.cdf[e - 1]) / h;
    return d;
}

namespace {

// Returns grid index j and fraction theta with u = u[j] + theta (u[j+1]-u[j]).
struct GridPosition {
    std::size_t j = 0;
    double theta = 0.0;
};

// E[(threshold - X)+] / spot over the distribution, trapezoid rule on the pdf.
double expected_shortfall_below(const RiskNeutralDistribution& d, double level) {
    const auto& x = d.strikes;
    const auto& p = d.pdf;
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < x.size() && x[j] < level; ++j) {
        const double right = std::min(x[j + 1], level);
        const double p_right =
            right == x[j + 1] ? p[j + 1] : p[j] + (p[j + 1] - p[j]) * (right - x[j]) / (x[j + 1] - x[j]);
        const double f_left = (level - x[j]) * p[j];
        const double f_right = (level - right) * p_right;
        total += 0.5 * (f_left + f_right) * (right - x[j]);
    }
    return total / d.spot;
}

}  // namespace

CreditRiskPoint credit_signals(const RiskNeutralDistribution& credit, const RiskNeutralDistribution& rates,
                               double tail_prob) {
    if (!(tail_prob > 0.0 && tail_prob < 0.5)) throw DataError("tail_prob must lie in (0, 0.5)");
    if (credit.date != rates.date) throw DataError("credit_signals: distributions are for different dates");
    if (credit.tenor != rates.tenor) throw DataError("credit_signals: distributions have different tenors");
    const auto& c = rates.cdf;
    if (c.front() > tail_prob) {
        throw DataError("credit_signals on " + format_date(rates.date) + ": tail probability " +
                        io::format_double(tail_prob) + " is below the cdf minimum " + io::format_double(c.front()));
    }
    if (c.back() < tail_prob) {
        throw DataError("credit_signals on " + format_date(rates.date) + ": cdf never reaches the tail probability");
    }

    // Step 1: invert the rates cdf in relative-return space.
    GridPosition pos;
    {
        const auto it = std::lower_bound(c.begin(), c.end(), tail_prob);
        const std::size_t k = static_cast<std::size_t>(it - c.begin());
        if (k == 0 || c[k] == tail_prob) {
            pos = {k, 0.0};
        } else {
            pos = {k - 1, (tail_prob - c[k - 1]) / (c[k] - c[k - 1])};
        }
    }
    auto rel = [](const RiskNeutralDistribution& d, std::size_t j) { return d.strikes[j] / d.spot - 1.0; };
    const double u_lo = rel(rates, pos.j);
    const double u_star =
        pos.theta == 0.0 ? u_lo : u_lo + pos.theta * (rel(rates, pos.j + 1) - u_lo);

    // Step 2: credit cdf at the same relative drawdown.
    double prob = 0.0;
    const bool same_segment = pos.j + 1 < credit.strikes.size() && pos.j + 1 < rates.strikes.size() &&
                              rel(credit, pos.j) == u_lo && rel(credit, pos.j + 1) == rel(rates, pos.j + 1) &&
                              credit.cdf[pos.j] == c[pos.j] && credit.cdf[pos.j + 1] == c[pos.j + 1];
    if (same_segment || (pos.theta == 0.0 && pos.j < credit.cdf.size() && rel(credit, pos.j) == u_lo &&
                         credit.cdf[pos.j] == c[pos.j])) {
        // Identical segment: the crossing value is tail_prob by construction.
        prob = tail_prob;
    } else {
        prob = credit.cdf_at(credit.spot * (1.0 + u_star));
    }

    // Step 3: expected drawdown beyond d*, net of the rates ETF's own.
    const double credit_tail = expected_shortfall_below(credit, credit.spot * (1.0 + u_star));
    const double rates_tail = expected_shortfall_below(rates, rates.spot * (1.0 + u_star));

    CreditRiskPoint point;
    point.date = credit.date;
    point.threshold_drawdown = u_star;
    point.prob_exceeds = prob;
    point.excess_probability = prob - tail_prob;
    point.excess_expected_drawdown = credit_tail - rates_tail;
    return point;
}

void write_distribution_csv(const RiskNeutralDistribution& dist, const std::filesystem::path& path) {
    io::AtomicFile f(path);
    auto& os = f.stream();
    os << "strike,cdf,pdf\n";
    for (std::size_t j = 0; j < dist.strikes.size(); ++j) {
        os << io::format_double(dist.strikes[j]) << ',' << io::format_double(dist.cdf[j]) << ','
           << io::format_double(dist.pdf[j]) << '\n';
    }
    f.commit();
}

}  // namespace credhedge
