#include "gcte/regression.hpp"

#include <string>
#include <utility>

#include "gcte/series.hpp"

namespace gcte {

RegressionFit ols_fit(const Matrix& regressors, const Matrix& target,
                      const std::vector<std::string>& labels) {
    if (regressors.rows() != target.rows())
        throw ShapeError("ols_fit: row counts differ (" +
                         std::to_string(regressors.rows()) + " vs " +
                         std::to_string(target.rows()) + ")");
    const int n = static_cast<int>(regressors.rows());
    const int k = static_cast<int>(regressors.cols());
    if (n < k + 2)
        throw InsufficientData("ols_fit: " + std::to_string(n) + " rows for " +
                               std::to_string(k) + " regressors, need at least " +
                               std::to_string(k + 2));

    Vector mean_x = regressors.colwise().mean();
    Vector mean_y = target.colwise().mean();
    Matrix xc = regressors.rowwise() - mean_x.transpose();
    Matrix yc = target.rowwise() - mean_y.transpose();

    Matrix gram = (xc.transpose() * xc) / static_cast<double>(n);
    gram = ((gram + gram.transpose()) * 0.5).eval();
    SpdMatrix g = SpdMatrix::semidefinite(std::move(gram));
    if (g.degenerate()) {
        const int j = g.min_pivot_index();
        std::string label = j >= 0 && j < static_cast<int>(labels.size())
                                ? labels[static_cast<std::size_t>(j)]
                                : "column " + std::to_string(j);
        throw CollinearRegressors("ols_fit: design is numerically collinear at " +
                                      label + " (pivot " +
                                      std::to_string(g.min_pivot()) + ")",
                                  j, label);
    }

    Matrix cross = (xc.transpose() * yc) / static_cast<double>(n);
    const auto lower = g.chol_lower().triangularView<Eigen::Lower>();
    Matrix coef = lower.transpose().solve(lower.solve(cross));

    RegressionFit fit;
    fit.intercepts = mean_y - coef.transpose() * mean_x;
    fit.num_obs = n;
    Matrix resid = yc - xc * coef;
    fit.coefficients = std::move(coef);
    MeanCov moments = sample_mean_cov(resid);
    fit.total_variance = moments.cov.values().trace();
    fit.residual_cov = std::move(moments.cov);
    return fit;
}

SpdMatrix residual_cov_formula(const SpdMatrix& target_cov,
                               const CrossCovariance& target_regressor_cov,
                               const SpdMatrix& regressor_cov) {
    return partial_covariance(target_cov, target_regressor_cov, regressor_cov);
}

Matrix residuals_of(const RegressionFit& fit, const Matrix& regressors,
                    const Matrix& target) {
    if (regressors.rows() != target.rows() ||
        regressors.cols() != fit.coefficients.rows() ||
        target.cols() != fit.coefficients.cols())
        throw ShapeError("residuals_of: dimensions do not match the fit");
    return (target - regressors * fit.coefficients).rowwise() -
           fit.intercepts.transpose();
}

double orthogonality_check(const RegressionFit& fit, const Matrix& regressors,
                           const Matrix& residuals) {
    if (regressors.rows() != residuals.rows() ||
        regressors.cols() != fit.coefficients.rows() ||
        residuals.cols() != fit.coefficients.cols())
        throw ShapeError("orthogonality_check: shapes do not match the fit");
    MeanCrossCov cross = sample_mean_cov(regressors, residuals);
    return cross.cov.values().cwiseAbs().maxCoeff();
}

} // namespace gcte
