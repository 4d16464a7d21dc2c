#include "gcte/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace gcte {

namespace {

std::string pivot_message(const char* what, int index, double value) {
    return std::string(what) + ": pivot " + std::to_string(index) + " = " +
           std::to_string(value);
}

} // namespace

SpdMatrix::SpdMatrix(Matrix values) {
    values_ = std::move(values);
    check_and_factor(/*strict=*/true);
}

SpdMatrix SpdMatrix::semidefinite(Matrix values) {
    SpdMatrix m;
    m.values_ = std::move(values);
    m.check_and_factor(/*strict=*/false);
    return m;
}

void SpdMatrix::check_and_factor(bool strict) {
    const int n = static_cast<int>(values_.rows());
    if (values_.cols() != n)
        throw ShapeError("SpdMatrix: matrix is not square");
    if (!values_.allFinite())
        throw ShapeError("SpdMatrix: non-finite entries");

    double max_asym = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            max_asym = std::max(max_asym, std::abs(values_(i, j) - values_(j, i)));
    if (max_asym > kSymmetryTol)
        throw ShapeError("SpdMatrix: asymmetry " + std::to_string(max_asym) +
                         " exceeds tolerance");
    // Kill the residual asymmetry so downstream algebra sees one value.
    values_ = ((values_ + values_.transpose()) * 0.5).eval();

    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(values_(i, i)));
    // Slack for clamping in permissive mode: roundoff from the subtraction
    // of same-scale quantities, proportional to the matrix scale.
    const double slack = 1e-12 * std::max(1.0, max_diag);

    chol_ = Matrix::Zero(n, n);
    degenerate_ = false;
    min_pivot_ = std::numeric_limits<double>::infinity();
    min_pivot_index_ = n > 0 ? 0 : -1;

    for (int k = 0; k < n; ++k) {
        double d = values_(k, k);
        for (int j = 0; j < k; ++j) d -= chol_(k, j) * chol_(k, j);
        if (d < min_pivot_) {
            min_pivot_ = d;
            min_pivot_index_ = k;
        }
        if (strict) {
            if (!(d > 0.0))
                throw NotPositiveDefinite(
                    pivot_message("matrix not positive definite", k, d), k);
        } else {
            if (d < -slack)
                throw NotPositiveDefinite(
                    pivot_message("matrix not positive semidefinite", k, d), k);
            if (d < 0.0) d = 0.0;
        }
        if (d < kDegeneratePivotTol) degenerate_ = true;
        chol_(k, k) = std::sqrt(d);
        for (int i = k + 1; i < n; ++i) {
            if (chol_(k, k) == 0.0) {
                chol_(i, k) = 0.0;
                continue;
            }
            double s = values_(i, k);
            for (int j = 0; j < k; ++j) s -= chol_(i, j) * chol_(k, j);
            chol_(i, k) = s / chol_(k, k);
        }
    }
    if (n == 0) min_pivot_ = 0.0;
}

CrossCovariance::CrossCovariance(Matrix values) : values_(std::move(values)) {
    if (!values_.allFinite())
        throw ShapeError("CrossCovariance: non-finite entries");
}

SpdMatrix partial_covariance(const SpdMatrix& sxx, const CrossCovariance& sxy,
                             const SpdMatrix& syy) {
    if (sxy.rows() != sxx.dim() || sxy.cols() != syy.dim())
        throw ShapeError("partial_covariance: cross block is " +
                         std::to_string(sxy.rows()) + "x" + std::to_string(sxy.cols()) +
                         ", expected " + std::to_string(sxx.dim()) + "x" +
                         std::to_string(syy.dim()));
    if (syy.degenerate())
        throw SingularConditioner(
            pivot_message("conditioning block is singular", syy.min_pivot_index(),
                          syy.min_pivot()),
            syy.min_pivot_index());

    // Sxy Syy^{-1} Syx = V^T V with V = L^{-1} Syx, one triangular solve.
    Matrix v = syy.chol_lower()
                   .triangularView<Eigen::Lower>()
                   .solve(sxy.values().transpose());
    Matrix m = sxx.values() - v.transpose() * v;
    m = ((m + m.transpose()) * 0.5).eval();
    return SpdMatrix::semidefinite(std::move(m));
}

double logdet(const SpdMatrix& m) {
    if (m.dim() == 1) {
        const double v = m.values()(0, 0);
        if (!(v > 0.0))
            throw NotPositiveDefinite(pivot_message("logdet of degenerate matrix", 0, v), 0);
        return std::log(v);
    }
    const Matrix& chol = m.chol_lower();
    double acc = 0.0;
    for (int k = 0; k < m.dim(); ++k) {
        const double l = chol(k, k);
        if (!(l > 0.0))
            throw NotPositiveDefinite(
                pivot_message("logdet of degenerate matrix", k, l * l), k);
        acc += std::log(l);
    }
    const double result = 2.0 * acc;
    if (!std::isfinite(result))
        throw NotPositiveDefinite("logdet overflowed", -1);
    return result;
}

SpdMatrix joint_covariance(const SpdMatrix& sxx, const CrossCovariance& sxy,
                           const SpdMatrix& syy) {
    if (sxy.rows() != sxx.dim() || sxy.cols() != syy.dim())
        throw ShapeError("joint_covariance: cross block is " +
                         std::to_string(sxy.rows()) + "x" + std::to_string(sxy.cols()) +
                         ", expected " + std::to_string(sxx.dim()) + "x" +
                         std::to_string(syy.dim()));
    const int n = sxx.dim();
    const int m = syy.dim();
    Matrix joint(n + m, n + m);
    joint.topLeftCorner(n, n) = sxx.values();
    joint.topRightCorner(n, m) = sxy.values();
    joint.bottomLeftCorner(m, n) = sxy.values().transpose();
    joint.bottomRightCorner(m, m) = syy.values();
    return SpdMatrix(std::move(joint));
}

} // namespace gcte
