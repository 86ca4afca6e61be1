#include "credhedge/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>

#include "credhedge/io.hpp"

namespace credhedge {
namespace {

struct Standardized {
    Eigen::MatrixXd values;
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd sd;
};

Standardized standardize(const Eigen::MatrixXd& m, std::string_view what) {
    Standardized s;
    const auto n = static_cast<double>(m.rows());
    s.mean = m.colwise().mean();
    const Eigen::MatrixXd centered = m.rowwise() - s.mean;
    s.sd = (centered.colwise().squaredNorm() / (n - 1.0)).cwiseSqrt();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double scale = std::max(1.0, std::abs(s.mean(j)));
        if (!(s.sd(j) > 1e-12 * scale)) {
            throw NumericalError(std::string(what) + " column " + std::to_string(j) + " has zero variance");
        }
    }
    s.values = centered.array().rowwise() / s.sd.array();
    return s;
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& cov, std::string_view what) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " covariance is not positive definite");
    Eigen::MatrixXd l = llt.matrixL();
    const double smallest = l.diagonal().minCoeff();
    if (!(smallest > 1e-7)) throw NumericalError(std::string(what) + " columns are collinear");
    return l;
}

}  // namespace

// ---------------------------------------------------------------------------
// Two-step OLS

OlsFit ols_fit(const Eigen::MatrixXd& signals, const Eigen::VectorXd& response) {
    if (signals.rows() != response.rows()) throw DataError("ols_fit: signals and response differ in length");
    const Eigen::Index k = signals.cols();
    const Eigen::Index pairs = signals.rows() - 1;
    if (k < 1) throw DataError("ols_fit: no signal columns");
    if (pairs < 10 || pairs < 2 * k || pairs <= k + 1) {
        throw DataError("ols_fit: window too short (" + std::to_string(pairs) + " pairs for " + std::to_string(k) +
                        " regressors)");
    }

    Eigen::MatrixXd design(pairs, k + 1);
    design.col(0).setOnes();
    design.rightCols(k) = signals.topRows(pairs);
    const Eigen::VectorXd y = response.tail(pairs);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < k + 1) throw NumericalError("ols_fit: rank-deficient regressor matrix");
    const Eigen::VectorXd coef = qr.solve(y);

    OlsFit fit;
    fit.pairs = static_cast<std::size_t>(pairs);
    fit.alpha = coef(0);
    fit.betas.assign(coef.data() + 1, coef.data() + coef.size());
    fit.forecast = coef(0) + signals.row(signals.rows() - 1).dot(coef.tail(k));

    const double sse = (y - design * coef).squaredNorm();
    const double sst = (y.array() - y.mean()).matrix().squaredNorm();
    const auto df1 = static_cast<double>(k);
    const auto df2 = static_cast<double>(pairs - k - 1);
    if (!(sst > 0.0)) {
        fit.f_stat = 0.0;
        fit.f_stat_p = 1.0;
    } else if (sse <= 1e-30 * sst) {
        fit.f_stat = std::numeric_limits<double>::infinity();
        fit.f_stat_p = 0.0;
    } else {
        fit.f_stat = std::max(0.0, (sst - sse) / df1) / (sse / df2);
        const boost::math::fisher_f dist(df1, df2);
        fit.f_stat_p = std::clamp(boost::math::cdf(boost::math::complement(dist, fit.f_stat)), 0.0, 1.0);
    }
    return fit;
}

int ols_indicator(const OlsFit& fit, double gamma_ols) {
    return fit.forecast < 0.0 && fit.f_stat_p <= gamma_ols ? 1 : 0;
}

HedgeBeta ols_hedge_beta(const Eigen::VectorXd& fund, const Eigen::VectorXd& hedge) {
    if (fund.size() != hedge.size()) throw DataError("ols_hedge_beta: series differ in length");
    if (fund.size() < 30) throw DataError("ols_hedge_beta: need at least 30 observations");
    const Eigen::ArrayXd h = hedge.array() - hedge.mean();
    const Eigen::ArrayXd f = fund.array() - fund.mean();
    const double var = h.square().sum();
    if (!(var > 1e-24 * static_cast<double>(hedge.size()))) {
        throw NumericalError("ols_hedge_beta: hedge series has zero variance");
    }
    HedgeBeta out;
    out.beta = (h * f).sum() / var;
    out.kappa = fund.mean() - out.beta * hedge.mean();
    return out;
}

// ---------------------------------------------------------------------------
// CCA

CanonicalPair first_canonical_pair(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    if (X.rows() != Y.rows()) throw DataError("canonical pair: X and Y differ in length");
    if (X.cols() < 1 || Y.cols() < 1) throw DataError("canonical pair: empty variable set");
    if (X.rows() < std::max(X.cols(), Y.cols()) + 2) throw DataError("canonical pair: too few observations");

    const auto sx = standardize(X, "signal");
    const auto sy = standardize(Y, "response");
    const double denom = static_cast<double>(X.rows()) - 1.0;
    const Eigen::MatrixXd cxx = sx.values.transpose() * sx.values / denom;
    const Eigen::MatrixXd cyy = sy.values.transpose() * sy.values / denom;
    const Eigen::MatrixXd cxy = sx.values.transpose() * sy.values / denom;

    const Eigen::MatrixXd lx = cholesky_factor(cxx, "signal");
    const Eigen::MatrixXd ly = cholesky_factor(cyy, "response");

    // K = Lx^-1 Cxy Ly^-T
    const Eigen::MatrixXd left = lx.triangularView<Eigen::Lower>().solve(cxy);
    const Eigen::MatrixXd k = ly.triangularView<Eigen::Lower>().solve(left.transpose()).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);

    const Eigen::VectorXd bw = lx.transpose().triangularView<Eigen::Upper>().solve(svd.matrixU().col(0));
    const Eigen::VectorXd aw = ly.transpose().triangularView<Eigen::Upper>().solve(svd.matrixV().col(0));

    CanonicalPair pair;
    pair.correlation = std::min(1.0, svd.singularValues()(0));
    pair.x_weights = bw.array() / sx.sd.transpose().array();
    pair.y_weights = aw.array() / sy.sd.transpose().array();
    return pair;
}

CcaFit cca_fit(const Eigen::MatrixXd& signals, const Eigen::MatrixXd& responses) {
    if (signals.rows() != responses.rows()) throw DataError("cca_fit: signals and responses differ in length");
    if (signals.rows() < 20) throw DataError("cca_fit: window must hold at least 20 days");
    if (responses.cols() != 2) throw DataError("cca_fit: responses must be (fund, hedge)");

    const Eigen::Index pairs = signals.rows() - 1;
    const Eigen::MatrixXd x = signals.topRows(pairs);
    const Eigen::MatrixXd y = responses.bottomRows(pairs);
    auto pair = first_canonical_pair(x, y);

    Eigen::VectorXd a = pair.y_weights;
    Eigen::VectorXd b = pair.x_weights;
    if (!(std::abs(a(0)) > 1e-10 * a.norm())) {
        throw DegenerateDirection("cca_fit: fund component of the canonical direction is zero");
    }
    const double scale = a(0);
    a /= scale;
    b /= scale;

    CcaFit fit;
    fit.pairs = static_cast<std::size_t>(pairs);
    fit.achieved_corr = pair.correlation;
    fit.w_star = a(1);

    const Eigen::VectorXd hedged = y * a;
    const Eigen::VectorXd joint = x * b;
    const double gm = joint.mean();
    const double hm = hedged.mean();
    const Eigen::ArrayXd gc = joint.array() - gm;
    const double gvar = gc.square().sum();
    if (!(gvar > 0.0)) throw NumericalError("cca_fit: joint signal component is constant");
    fit.beta = (gc * (hedged.array() - hm)).sum() / gvar;
    fit.omega = hm - fit.beta * gm;
    const Eigen::VectorXd fitted = (fit.omega + fit.beta * joint.array()).matrix();
    const Eigen::VectorXd resid = hedged - fitted;
    fit.residuals.assign(resid.data(), resid.data() + resid.size());

    const double today = signals.row(signals.rows() - 1).dot(b);
    fit.forecast = fit.omega + fit.beta * today;
    const double fitted_mean = fitted.mean();
    const double fitted_sd =
        std::sqrt((fitted.array() - fitted_mean).square().sum() / static_cast<double>(pairs - 1));
    fit.a = std::move(a);
    fit.b = std::move(b);
    fit.zscore = fitted_sd > 1e-300 ? (fit.forecast - fitted_mean) / fitted_sd : 0.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Hedge timing

std::string_view hedge_cause_name(HedgeCause cause) {
    switch (cause) {
        case HedgeCause::NeverOn: return "never_on";
        case HedgeCause::EntrySignal: return "entry_signal";
        case HedgeCause::ExitMeanRevert: return "exit_mean_revert";
    }
    return "never_on";
}

HedgeTimingState hedge_state_step(const HedgeTimingState& state, const Date& date, double w_star, double z,
                                  double gamma_upper, double gamma_lower) {
    if (!(gamma_upper > gamma_lower)) throw DataError("gamma_upper must exceed gamma_lower");
    HedgeTimingState next = state;
    if (state.on) {
        if (z < gamma_lower) {
            next.on = false;
            next.cause = HedgeCause::ExitMeanRevert;
            next.last_transition = date;
        }
    } else if (w_star < 0.0 && z > gamma_upper) {
        next.on = true;
        next.cause = HedgeCause::EntrySignal;
        next.last_transition = date;
    }
    return next;
}

double cap_and_scale(double weight, double sigma_fund, double sigma_hedge) {
    if (!(sigma_hedge > 0.0) || !std::isfinite(sigma_hedge)) {
        throw NumericalError("cap_and_scale: hedge volatility must be positive");
    }
    if (!(sigma_fund >= 0.0)) throw NumericalError("cap_and_scale: fund volatility must be non-negative");
    const double limit = std::min({std::abs(weight), sigma_fund / sigma_hedge, 1.0});
    return std::copysign(limit, weight);
}

// ---------------------------------------------------------------------------
// Multi-hedge aggregation

PcaHedge pca_first_component(const Eigen::MatrixXd& returns) {
    if (returns.cols() < 2) throw DataError("pca: need at least two hedge instruments");
    if (returns.rows() < 20) throw DataError("pca: window must hold at least 20 days");
    const Eigen::MatrixXd centered = returns.rowwise() - returns.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(returns.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError("pca: eigen decomposition failed");
    const Eigen::Index top = returns.cols() - 1;
    const double lambda = eig.eigenvalues()(top);
    if (!(lambda > 1e-300)) throw NumericalError("pca: hedge returns have zero covariance");

    PcaHedge pc;
    pc.loadings = eig.eigenvectors().col(top).normalized();
    double sum = pc.loadings.sum();
    if (std::abs(sum) <= 1e-12) {
        throw NumericalError("pca: first component loadings sum to zero; weights cannot be normalized");
    }
    if (sum < 0.0) {
        pc.loadings = -pc.loadings;
        sum = -sum;
    }
    pc.weights = pc.loadings / sum;
    pc.explained_variance = lambda / cov.trace();
    return pc;
}

// ---------------------------------------------------------------------------
// Diagnostics

void write_model_diagnostics(const std::vector<ModelDiagnosticRow>& rows, const std::filesystem::path& path,
                             const std::string& header_comment) {
    io::AtomicFile file(path);
    auto& out = file.stream();
    if (!header_comment.empty()) out << "# " << header_comment << '\n';
    out << "date,model,achieved_corr,forecast,zscore,indicator,W_raw,W_capped\n";
    for (const auto& r : rows) {
        out << format_date(r.date) << ',' << r.model << ',' << io::format_double(r.achieved_corr) << ','
            << io::format_double(r.forecast) << ',' << io::format_double(r.zscore) << ',' << r.indicator << ','
            << io::format_double(r.w_raw) << ',' << io::format_double(r.w_capped) << '\n';
    }
    file.commit();
}

}  // namespace credhedge
