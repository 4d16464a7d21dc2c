#pragma once

#include <Eigen/Dense>

#include "gcte/errors.hpp"

namespace gcte {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Absolute tolerance for the symmetry check at construction.
inline constexpr double kSymmetryTol = 1e-12;

// Pivots below this are treated as numerically zero directions: the matrix
// is kept but flagged degenerate, and refuses to serve as a conditioning
// block.
inline constexpr double kDegeneratePivotTol = 1e-14;

// Symmetric positive (semi)definite matrix with a cached lower Cholesky
// factor. Two construction modes:
//
//   SpdMatrix(m)              strict: every pivot must be > 0, else
//                             NotPositiveDefinite with the failing index.
//   SpdMatrix::semidefinite(m) permissive: tiny negative pivots (within a
//                             scale-relative slack) are clamped to zero and
//                             the matrix is flagged degenerate instead of
//                             rejected. Genuinely indefinite input still
//                             throws.
//
// Both modes require symmetry within kSymmetryTol (absolute) and finite
// entries; the stored matrix is exactly symmetrized after the check.
class SpdMatrix {
public:
    // Empty 0x0 placeholder so result structs can be declared before being
    // filled; every invariant holds vacuously.
    SpdMatrix() = default;

    explicit SpdMatrix(Matrix values);
    static SpdMatrix semidefinite(Matrix values);

    int dim() const { return static_cast<int>(values_.rows()); }
    const Matrix& values() const { return values_; }
    const Matrix& chol_lower() const { return chol_; }

    // True when some pivot fell below kDegeneratePivotTol (or was clamped).
    bool degenerate() const { return degenerate_; }
    double min_pivot() const { return min_pivot_; }
    int min_pivot_index() const { return min_pivot_index_; }

private:
    void check_and_factor(bool strict);

    Matrix values_;
    Matrix chol_;
    bool degenerate_ = false;
    double min_pivot_ = 0.0;
    int min_pivot_index_ = -1;
};

// Cross-covariance block between two variable groups; rows index the first
// group, columns the second. Plain storage with finiteness checking.
class CrossCovariance {
public:
    explicit CrossCovariance(Matrix values);

    int rows() const { return static_cast<int>(values_.rows()); }
    int cols() const { return static_cast<int>(values_.cols()); }
    const Matrix& values() const { return values_; }

private:
    Matrix values_;
};

// Covariance of the first group conditional on the second:
//   Sxx - Sxy Syy^{-1} Syx,
// computed through the cached Cholesky factor of Syy (one triangular
// solve; Syy is never inverted explicitly). A degenerate conditioning
// block throws SingularConditioner with its failing pivot index. The
// result may itself be degenerate (perfect prediction); that is reported
// through the degenerate() flag of the returned matrix, not as an error.
SpdMatrix partial_covariance(const SpdMatrix& sxx, const CrossCovariance& sxy,
                             const SpdMatrix& syy);

// log |M| as 2*sum(log L_kk). A 1x1 matrix is handled as log of its single
// entry so that univariate statistics computed through this routine are
// bit-for-bit identical to the scalar log-variance form, not just equal to
// rounding. Throws NotPositiveDefinite when a pivot is zero (degenerate
// matrices have no finite log-determinant).
double logdet(const SpdMatrix& m);

// Assemble [[Sxx, Sxy], [Syx, Syy]] and validate it as strictly positive
// definite. Fails with NotPositiveDefinite when the blocks are mutually
// inconsistent (the Schur complement has a non-positive direction).
SpdMatrix joint_covariance(const SpdMatrix& sxx, const CrossCovariance& sxy,
                           const SpdMatrix& syy);

} // namespace gcte
