#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "credhedge/core.hpp"

namespace credhedge {

/// Raised when the canonical direction has no usable fund component. The
/// caller skips the day and leaves the hedge state unchanged.
class DegenerateDirection : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Window convention shared by ols_fit and cca_fit: X and Y hold the same n
// consecutive days (oldest first). Signals on day s are paired with the
// response on day s + 1, giving n - 1 training pairs, and the forecast for
// the day after the window uses X's last row.

// ---------------------------------------------------------------------------
// Two-step OLS

struct OlsFit {
    std::size_t pairs = 0;
    double alpha = 0.0;
    std::vector<double> betas;  // one per signal column
    double forecast = 0.0;      // next-day response forecast
    double f_stat = 0.0;
    double f_stat_p = 1.0;      // p-value for joint significance of the slopes
};

OlsFit ols_fit(const Eigen::MatrixXd& signals, const Eigen::VectorXd& response);

/// 1 iff the forecast is negative and the fit is significant at gamma_ols.
int ols_indicator(const OlsFit& fit, double gamma_ols);

struct HedgeBeta {
    double beta = 0.0;
    double kappa = 0.0;
};

/// Slope and intercept of fund returns regressed on hedge returns (n >= 30).
HedgeBeta ols_hedge_beta(const Eigen::VectorXd& fund, const Eigen::VectorXd& hedge);

// ---------------------------------------------------------------------------
// CCA

struct CanonicalPair {
    double correlation = 0.0;
    Eigen::VectorXd x_weights;  // raw units
    Eigen::VectorXd y_weights;  // raw units
};

/// First canonical pair of X and Y (rows are paired as given). Columns are
/// standardized internally; weights are returned in raw column units with
/// corr(X x_weights, Y y_weights) = correlation >= 0.
CanonicalPair first_canonical_pair(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

struct CcaFit {
    std::size_t pairs = 0;
    Eigen::VectorXd a;  // response weights (fund first), scaled so a(0) = 1
    Eigen::VectorXd b;  // signal weights
    double achieved_corr = 0.0;
    double w_star = 0.0;  // a(1): hedge weight per unit of fund
    double omega = 0.0;
    double beta = 0.0;
    std::vector<double> residuals;
    double forecast = 0.0;  // next-day hedged return forecast
    double zscore = 0.0;    // forecast against the in-window fitted values
};

/// Y columns are (fund, hedge). Throws DegenerateDirection when the fund
/// component of the canonical response direction vanishes.
CcaFit cca_fit(const Eigen::MatrixXd& signals, const Eigen::MatrixXd& responses);

// ---------------------------------------------------------------------------
// Hedge timing

enum class HedgeCause { NeverOn, EntrySignal, ExitMeanRevert };

std::string_view hedge_cause_name(HedgeCause cause);

struct HedgeTimingState {
    bool on = false;
    std::optional<Date> last_transition;
    HedgeCause cause = HedgeCause::NeverOn;
};

/// Off -> On iff w_star < 0 and z > gamma_upper; On stays On iff z >= gamma_lower.
HedgeTimingState hedge_state_step(const HedgeTimingState& state, const Date& date, double w_star, double z,
                                  double gamma_upper, double gamma_lower);

/// |W| = min(|W|, sigma_fund / sigma_hedge, 1) with the sign of W.
double cap_and_scale(double weight, double sigma_fund, double sigma_hedge);

// ---------------------------------------------------------------------------
// Multi-hedge aggregation

struct PcaHedge {
    Eigen::VectorXd loadings;  // unit norm, sum > 0
    Eigen::VectorXd weights;   // loadings rescaled to sum to 1
    double explained_variance = 0.0;
};

/// First principal component of the columns of `returns` (rows = days).
PcaHedge pca_first_component(const Eigen::MatrixXd& returns);

// ---------------------------------------------------------------------------
// Diagnostics

struct ModelDiagnosticRow {
    Date date;
    std::string model;
    double achieved_corr = 0.0;
    double forecast = 0.0;
    double zscore = 0.0;
    int indicator = 0;
    double w_raw = 0.0;
    double w_capped = 0.0;
};

void write_model_diagnostics(const std::vector<ModelDiagnosticRow>& rows, const std::filesystem::path& path,
                             const std::string& header_comment = {});

}  // namespace credhedge
