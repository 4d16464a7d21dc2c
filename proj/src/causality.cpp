#include "gcte/causality.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>

#include "gcte/stats.hpp"

namespace gcte {

namespace {

// ln(2*pi*e)
constexpr double kLog2PiE = 2.8378770664093454836;

double clamp_measure(double value, const char* what) {
    if (value >= 0.0) return value;
    if (value >= -kMeasureClampTol) return 0.0;
    throw InternalError(std::string(what) +
                        " is negative beyond numerical slack: " +
                        std::to_string(value) +
                        "; restricted residuals can never beat full residuals");
}

void check_residual_pair(const SpdMatrix& restricted_cov, const SpdMatrix& full_cov) {
    if (restricted_cov.dim() != full_cov.dim())
        throw ShapeError("residual covariances disagree on dimension (" +
                         std::to_string(restricted_cov.dim()) + " vs " +
                         std::to_string(full_cov.dim()) + ")");
    if (full_cov.degenerate())
        throw DegenerateResiduals(
            "full-model residual covariance is singular (pivot " +
            std::to_string(full_cov.min_pivot()) + " at index " +
            std::to_string(full_cov.min_pivot_index()) +
            "): target is perfectly predictable");
    if (restricted_cov.degenerate())
        throw DegenerateResiduals(
            "restricted-model residual covariance is singular (pivot " +
            std::to_string(restricted_cov.min_pivot()) + " at index " +
            std::to_string(restricted_cov.min_pivot_index()) + ")");
}

} // namespace

void CausalityQuery::validate(int num_panel_vars) const {
    lags.validate();
    if (predictee_cols.empty()) throw QueryError("query has no predictee columns");
    if (predictor_cols.empty()) throw QueryError("query has no predictor columns");
    std::set<int> seen;
    auto check_set = [&](const std::vector<int>& cols, const char* role) {
        for (int c : cols) {
            if (c < 0 || c >= num_panel_vars)
                throw QueryError(std::string(role) + " column index " +
                                 std::to_string(c) + " out of range [0, " +
                                 std::to_string(num_panel_vars) + ")");
            if (!seen.insert(c).second)
                throw QueryError("column " + std::to_string(c) +
                                 " appears in more than one role (roles must be disjoint)");
        }
    };
    check_set(predictee_cols, "predictee");
    check_set(predictor_cols, "predictor");
    check_set(conditioning_cols, "conditioning");
}

double granger_causality(const SpdMatrix& restricted_residual_cov,
                         const SpdMatrix& full_residual_cov) {
    check_residual_pair(restricted_residual_cov, full_residual_cov);
    const double diff = logdet(restricted_residual_cov) - logdet(full_residual_cov);
    return clamp_measure(diff, "granger_causality");
}

double granger_causality_univariate(double var_restricted, double var_full) {
    if (!(var_restricted > 0.0) || !(var_full > 0.0))
        throw DegenerateResiduals("univariate residual variance is not positive");
    return clamp_measure(std::log(var_restricted) - std::log(var_full),
                         "granger_causality");
}

double transfer_entropy_gaussian(const SpdMatrix& restricted_residual_cov,
                                 const SpdMatrix& full_residual_cov) {
    check_residual_pair(restricted_residual_cov, full_residual_cov);
    const double diff =
        logdet(restricted_residual_cov) - logdet(full_residual_cov);
    return clamp_measure(0.5 * diff, "transfer_entropy");
}

double gaussian_entropy(const SpdMatrix& cov) {
    return 0.5 * logdet(cov) + 0.5 * cov.dim() * kLog2PiE;
}

double gaussian_conditional_entropy(const SpdMatrix& sxx, const CrossCovariance& sxy,
                                    const SpdMatrix& syy) {
    return gaussian_entropy(partial_covariance(sxx, sxy, syy));
}

CovPathResult causality_from_joint(const Matrix& joint, int target_dim,
                                   int predictee_lag_cols, int predictor_lag_cols,
                                   int conditioning_lag_cols, double jitter,
                                   const std::vector<std::string>& labels) {
    const int d = target_dim;
    const int k_full = predictee_lag_cols + predictor_lag_cols + conditioning_lag_cols;
    if (joint.rows() != d + k_full || joint.cols() != d + k_full)
        throw ShapeError("causality_from_joint: joint covariance is " +
                         std::to_string(joint.rows()) + "x" +
                         std::to_string(joint.cols()) + ", expected " +
                         std::to_string(d + k_full) + " square");
    if (jitter < 0.0) throw QueryError("jitter must be non-negative");

    // Indices of the restricted design inside the full design: the
    // predictee lag block, then the conditioning lag block (the predictor
    // block sits between them).
    std::vector<int> restricted;
    restricted.reserve(static_cast<std::size_t>(predictee_lag_cols + conditioning_lag_cols));
    for (int j = 0; j < predictee_lag_cols; ++j) restricted.push_back(j);
    for (int j = predictee_lag_cols + predictor_lag_cols; j < k_full; ++j)
        restricted.push_back(j);

    SpdMatrix target_cov =
        SpdMatrix::semidefinite(joint.topLeftCorner(d, d));

    Matrix full_reg = joint.bottomRightCorner(k_full, k_full);
    for (int j = 0; j < k_full; ++j) full_reg(j, j) += jitter;

    Matrix restricted_reg(restricted.size(), restricted.size());
    for (std::size_t a = 0; a < restricted.size(); ++a)
        for (std::size_t b = 0; b < restricted.size(); ++b)
            restricted_reg(static_cast<int>(a), static_cast<int>(b)) =
                full_reg(restricted[a], restricted[b]);

    Matrix cross_full = joint.topRightCorner(d, k_full);
    Matrix cross_restricted(d, restricted.size());
    for (std::size_t b = 0; b < restricted.size(); ++b)
        cross_restricted.col(static_cast<int>(b)) = cross_full.col(restricted[b]);

    auto label_of = [&](int col) {
        return col >= 0 && col < static_cast<int>(labels.size())
                   ? labels[static_cast<std::size_t>(col)]
                   : "design column " + std::to_string(col);
    };

    CovPathResult out;
    SpdMatrix full_reg_cov;
    SpdMatrix restricted_reg_cov;
    try {
        full_reg_cov = SpdMatrix::semidefinite(std::move(full_reg));
        restricted_reg_cov = SpdMatrix::semidefinite(std::move(restricted_reg));
    } catch (const NotPositiveDefinite& e) {
        // Covariance blocks of real data are PSD up to roundoff; genuinely
        // indefinite input means the design is numerically broken.
        throw CollinearRegressors(std::string("regressor covariance is indefinite: ") +
                                      e.what(),
                                  e.pivot_index, label_of(e.pivot_index));
    }
    out.regressor_min_pivot = full_reg_cov.min_pivot();
    if (full_reg_cov.degenerate()) {
        const int j = full_reg_cov.min_pivot_index();
        throw CollinearRegressors(
            "regressors are numerically collinear at " + label_of(j) + " (pivot " +
                std::to_string(full_reg_cov.min_pivot()) + ")",
            j, label_of(j));
    }
    if (restricted_reg_cov.degenerate()) {
        const int j = restricted_reg_cov.min_pivot_index();
        const int full_index = restricted[static_cast<std::size_t>(j)];
        throw CollinearRegressors(
            "restricted regressors are numerically collinear at " +
                label_of(full_index) + " (pivot " +
                std::to_string(restricted_reg_cov.min_pivot()) + ")",
            full_index, label_of(full_index));
    }
    out.restricted_residual_cov = partial_covariance(
        target_cov, CrossCovariance(std::move(cross_restricted)), restricted_reg_cov);
    out.full_residual_cov = partial_covariance(
        target_cov, CrossCovariance(std::move(cross_full)), full_reg_cov);

    out.granger_f =
        granger_causality(out.restricted_residual_cov, out.full_residual_cov);
    out.transfer_entropy =
        transfer_entropy_gaussian(out.restricted_residual_cov, out.full_residual_cov);
    out.restricted_logdet = logdet(out.restricted_residual_cov);
    out.full_logdet = logdet(out.full_residual_cov);
    return out;
}

GrangerEstimate estimate_causality(const CausalityQuery& query,
                                   const TimeSeriesPanel& panel, double jitter) {
    query.validate(panel.num_vars());
    TimeSeriesPanel x = panel.select(query.predictee_cols);
    TimeSeriesPanel y = panel.select(query.predictor_cols);
    const bool has_z = !query.conditioning_cols.empty() && query.lags.r > 0;
    TimeSeriesPanel z = has_z ? panel.select(query.conditioning_cols)
                              : TimeSeriesPanel(Matrix(panel.num_steps(), 0), {});
    LaggedDesign design =
        build_designs(x, y, has_z ? &z : nullptr, query.lags);

    const int d = x.num_vars();
    const int k_full = static_cast<int>(design.full.cols());
    Matrix stacked(design.effective_rows, d + k_full);
    stacked.leftCols(d) = design.target;
    stacked.rightCols(k_full) = design.full;
    MeanCov moments = sample_mean_cov(stacked);

    GrangerEstimate est;
    est.path = causality_from_joint(
        moments.cov.values(), d, query.lags.p * d,
        query.lags.q * y.num_vars(),
        has_z ? query.lags.r * z.num_vars() : 0, jitter, design.full_labels);
    est.effective_obs = design.effective_rows;
    est.num_obs = panel.num_steps();
    est.dof = d * y.num_vars() * query.lags.q;
    return est;
}

CausalityResult equivalence_report(const CausalityQuery& query,
                                   const TimeSeriesPanel& panel, double jitter) {
    GrangerEstimate est = estimate_causality(query, panel, jitter);

    CausalityResult r;
    r.granger_f = est.path.granger_f;
    r.transfer_entropy = est.path.transfer_entropy;
    r.restricted_logdet = est.path.restricted_logdet;
    r.full_logdet = est.path.full_logdet;
    r.equivalence_gap = std::abs(r.granger_f - 2.0 * r.transfer_entropy);
    r.dof = est.dof;
    r.num_obs = est.num_obs;
    r.effective_obs = est.effective_obs;
    r.jitter = jitter;
    r.regressor_min_pivot = est.path.regressor_min_pivot;
    r.residual_min_pivot = est.path.full_residual_cov.min_pivot();

    SignificanceResult sig =
        chi2_test(r.granger_f, r.effective_obs,
                  static_cast<int>(query.predictee_cols.size()),
                  static_cast<int>(query.predictor_cols.size()), query.lags.q);
    r.statistic = sig.statistic;
    r.p_value = sig.p_value;

    if (r.granger_f < 0.0 || r.transfer_entropy < 0.0)
        throw InternalError("causality measures negative after clamp");
    if (r.equivalence_gap > kMeasureClampTol)
        throw InternalError("equivalence gap " + std::to_string(r.equivalence_gap) +
                            " exceeds 1e-12: measure routes have diverged");
    return r;
}

} // namespace gcte
