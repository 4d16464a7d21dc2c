#pragma once

#include <string>
#include <vector>

#include "gcte/linalg.hpp"
#include "gcte/series.hpp"

namespace gcte {

// One directed question: does the past of the predictor columns improve
// prediction of the predictee columns beyond the predictee's own past and
// the conditioning columns' past? Column indices refer to one panel; the
// three sets must be disjoint and the first two non-empty.
struct CausalityQuery {
    std::vector<int> predictee_cols;
    std::vector<int> predictor_cols;
    std::vector<int> conditioning_cols; // may be empty (unconditional case)
    LagSpec lags;

    void validate(int num_panel_vars) const; // QueryError on violation
};

// Everything equivalence_report measures. granger_f and transfer_entropy
// are in nats and non-negative after the numerical clamp; equivalence_gap
// is |F - 2T| and is asserted <= 1e-12 before the result is returned.
struct CausalityResult {
    double granger_f = 0.0;
    double transfer_entropy = 0.0;
    double restricted_logdet = 0.0;
    double full_logdet = 0.0;
    double equivalence_gap = 0.0;
    int dof = 0;
    double statistic = 0.0; // effective_obs * granger_f
    double p_value = 1.0;   // asymptotic chi-squared upper tail
    int num_obs = 0;        // panel rows
    int effective_obs = 0;  // rows entering the regressions
    double jitter = 0.0;
    double regressor_min_pivot = 0.0; // conditioning diagnostics
    double residual_min_pivot = 0.0;
};

// Negative measure values within this slack of zero are floating-point
// noise and clamp to zero; anything more negative is an internal error,
// since the restricted model can never beat the full model in-sample.
inline constexpr double kMeasureClampTol = 1e-12;

// Log generalized-variance ratio: logdet(restricted) - logdet(full),
// clamped at zero within kMeasureClampTol. Degenerate residual covariance
// (perfectly predictable target) throws DegenerateResiduals.
double granger_causality(const SpdMatrix& restricted_residual_cov,
                         const SpdMatrix& full_residual_cov);

// Scalar form for a univariate predictee: log(var_restricted) -
// log(var_full). The matrix route reduces to exactly this expression for
// 1x1 covariances, and tests assert bit-for-bit agreement.
double granger_causality_univariate(double var_restricted, double var_full);

// Gaussian transfer entropy from the same residual covariances:
//   T = 1/2 [logdet(restricted) - logdet(full)],
// so F = 2T holds exactly when both are computed from one covariance pass.
double transfer_entropy_gaussian(const SpdMatrix& restricted_residual_cov,
                                 const SpdMatrix& full_residual_cov);

// Differential entropy of a Gaussian with the given covariance, in nats:
// 1/2 logdet + dim/2 * ln(2*pi*e).
double gaussian_entropy(const SpdMatrix& cov);

// Entropy of the first block conditional on the second: the entropy of
// the partial covariance. Equals H(joint) - H(conditioner) up to
// floating-point noise (block determinant identity); tests check both
// routes against each other.
double gaussian_conditional_entropy(const SpdMatrix& sxx, const CrossCovariance& sxy,
                                    const SpdMatrix& syy);

// Shared moment->measure path used by both the sample estimator and the
// population oracle. `joint` is the covariance of (target block, full
// regressor block) with the regressor block laid out as predictee lags,
// predictor lags, conditioning lags. jitter is added to the regressor
// diagonal before conditioning. labels (optional) name regressor columns
// in collinearity errors.
struct CovPathResult {
    SpdMatrix restricted_residual_cov;
    SpdMatrix full_residual_cov;
    double granger_f = 0.0;
    double transfer_entropy = 0.0;
    double restricted_logdet = 0.0;
    double full_logdet = 0.0;
    double regressor_min_pivot = 0.0;
};
CovPathResult causality_from_joint(const Matrix& joint, int target_dim,
                                   int predictee_lag_cols, int predictor_lag_cols,
                                   int conditioning_lag_cols, double jitter = 0.0,
                                   const std::vector<std::string>& labels = {});

// Sample-path estimate: build the lagged designs, take one mean/covariance
// pass over (target, full regressors), and evaluate both measures from it.
struct GrangerEstimate {
    CovPathResult path;
    int effective_obs = 0;
    int num_obs = 0;
    int dof = 0; // dim(predictee) * dim(predictor) * q
};
GrangerEstimate estimate_causality(const CausalityQuery& query,
                                   const TimeSeriesPanel& panel, double jitter = 0.0);

// Full report: measures, logdets, dof, asymptotic p-value, diagnostics.
// Enforces the CausalityResult invariants before returning.
CausalityResult equivalence_report(const CausalityQuery& query,
                                   const TimeSeriesPanel& panel, double jitter = 0.0);

} // namespace gcte
