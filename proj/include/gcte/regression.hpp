#pragma once

#include <string>
#include <vector>

#include "gcte/linalg.hpp"

namespace gcte {

// Multivariate least squares Y ~ intercept + X * coefficients, fitted
// through the normal equations with a Cholesky solve (the Gram matrix is
// never inverted explicitly). Coefficient rows index regressors, columns
// index targets.
struct RegressionFit {
    Matrix coefficients;   // K x d
    Vector intercepts;     // d
    SpdMatrix residual_cov; // from the actual residuals, denominator N
    double total_variance = 0.0; // trace of residual_cov
    int num_obs = 0;
};

// labels, when given, name the design columns for diagnostics; a
// numerically collinear design throws CollinearRegressors naming the
// column with the smallest Cholesky pivot.
RegressionFit ols_fit(const Matrix& regressors, const Matrix& target,
                      const std::vector<std::string>& labels = {});

// Residual covariance through the moment identity
//   cov(target) - cross * cov(regressors)^{-1} * cross^T
// instead of explicit residuals. Used as an independent cross-check of
// ols_fit; the two routes agree to numerical precision on the same data.
SpdMatrix residual_cov_formula(const SpdMatrix& target_cov,
                               const CrossCovariance& target_regressor_cov,
                               const SpdMatrix& regressor_cov);

Matrix residuals_of(const RegressionFit& fit, const Matrix& regressors,
                    const Matrix& target);

// Largest absolute sample covariance between any regressor column and any
// residual column. Exact orthogonality is the defining property of least
// squares; values above ~1e-10 on well-scaled data indicate a broken solve.
// The residuals are passed explicitly (rather than recomputed from the fit)
// so the check can also score deliberately perturbed residuals; the fit is
// used to validate that the shapes belong together.
double orthogonality_check(const RegressionFit& fit, const Matrix& regressors,
                           const Matrix& residuals);

} // namespace gcte
