#include "doctest.h"

#include <cmath>
#include <cstdint>

#include "gcte/regression.hpp"
#include "gcte/rng.hpp"
#include "gcte/series.hpp"

using gcte::Matrix;
using gcte::RegressionFit;
using gcte::Vector;

namespace {

Matrix normals(gcte::CounterRng& rng, std::uint64_t& cursor, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(cursor++);
    return m;
}

} // namespace

TEST_CASE("noiseless data is recovered exactly") {
    gcte::CounterRng rng(1, 0);
    std::uint64_t cursor = 0;
    Matrix x = normals(rng, cursor, 50, 1);
    Matrix y = 2.0 * x;
    y.array() += 1.0;
    RegressionFit fit = gcte::ols_fit(x, y);
    CHECK(fit.coefficients(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.intercepts(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.residual_cov.values()(0, 0) < 1e-24);
    CHECK(fit.residual_cov.degenerate()); // perfect fit has no noise left
    CHECK(fit.num_obs == 50);
}

TEST_CASE("coefficients land within standard errors of the truth") {
    gcte::CounterRng rng(2, 0);
    std::uint64_t cursor = 0;
    const int n = 20000;
    Matrix x = normals(rng, cursor, n, 3);
    Matrix b(3, 2);
    b << 1.0, -0.5, 0.25, 2.0, -1.5, 0.0;
    Matrix y = x * b + 0.7 * normals(rng, cursor, n, 2);
    RegressionFit fit = gcte::ols_fit(x, y);
    // independent regressors: se(b_jk) ~ sigma_k / sqrt(n)
    const double se = 0.7 / std::sqrt(static_cast<double>(n));
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 2; ++k)
            CHECK(std::abs(fit.coefficients(j, k) - b(j, k)) < 4.0 * se);
    // residual covariance estimates the noise level
    CHECK(fit.residual_cov.values()(0, 0) == doctest::Approx(0.49).epsilon(0.05));
    CHECK(fit.residual_cov.values()(0, 1) == doctest::Approx(0.0).scale(0.49).epsilon(0.05));
    CHECK(fit.total_variance ==
          doctest::Approx(fit.residual_cov.values().trace()).epsilon(1e-15));
}

TEST_CASE("explicit residuals and the moment formula agree") {
    gcte::CounterRng rng(3, 0);
    std::uint64_t cursor = 0;
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 500 + 300 * rep;
        const int k = 2 + rep;
        Matrix x = normals(rng, cursor, n, k);
        // correlate the regressors so the Gram matrix is not near-diagonal
        for (int j = 1; j < k; ++j) x.col(j) += 0.5 * x.col(0);
        Matrix b = normals(rng, cursor, k, 2);
        Matrix y = x * b + normals(rng, cursor, n, 2);

        RegressionFit fit = gcte::ols_fit(x, y);
        gcte::MeanCov ty = gcte::sample_mean_cov(y);
        gcte::MeanCov tx = gcte::sample_mean_cov(x);
        gcte::MeanCrossCov cross = gcte::sample_mean_cov(y, x);
        gcte::SpdMatrix formula = gcte::residual_cov_formula(ty.cov, cross.cov, tx.cov);
        CHECK((fit.residual_cov.values() - formula.values()).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("fit reconstructs the target from its own pieces") {
    gcte::CounterRng rng(4, 0);
    std::uint64_t cursor = 0;
    Matrix x = normals(rng, cursor, 300, 4);
    Matrix y = x.leftCols(2) + 0.3 * normals(rng, cursor, 300, 2);
    RegressionFit fit = gcte::ols_fit(x, y);
    Matrix resid = gcte::residuals_of(fit, x, y);
    Matrix rebuilt =
        (x * fit.coefficients).rowwise() + fit.intercepts.transpose();
    CHECK((y - rebuilt - resid).cwiseAbs().maxCoeff() < 1e-12);

    // orthogonality holds for the true fit
    CHECK(gcte::orthogonality_check(fit, x, resid) < 1e-10);

    // and fails visibly once the coefficients are tampered with
    RegressionFit bent = fit;
    bent.coefficients(0, 0) += 0.01;
    Matrix bent_resid = gcte::residuals_of(bent, x, y);
    CHECK(gcte::orthogonality_check(bent, x, bent_resid) > 1e-4);

    Matrix wrong(10, 4);
    wrong.setZero();
    CHECK_THROWS_AS(gcte::orthogonality_check(fit, wrong, resid),
                    gcte::ShapeError);
}

TEST_CASE("adding regressors never hurts the in-sample fit") {
    gcte::CounterRng rng(5, 0);
    std::uint64_t cursor = 0;
    const int n = 400;
    Matrix x = normals(rng, cursor, n, 6);
    Matrix y = x.leftCols(1) * 0.8 + normals(rng, cursor, n, 1);
    double prev_tv = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 6; ++k) {
        RegressionFit fit = gcte::ols_fit(x.leftCols(k), y);
        CHECK(fit.total_variance <= prev_tv + 1e-12);
        prev_tv = fit.total_variance;
    }
}

TEST_CASE("rescaling a regressor column changes nothing downstream") {
    gcte::CounterRng rng(6, 0);
    std::uint64_t cursor = 0;
    Matrix x = normals(rng, cursor, 250, 3);
    Matrix y = x * Matrix::Ones(3, 1) + 0.5 * normals(rng, cursor, 250, 1);
    RegressionFit base = gcte::ols_fit(x, y);
    Matrix scaled = x;
    scaled.col(1) *= 1000.0;
    RegressionFit rescaled = gcte::ols_fit(scaled, y);
    Matrix r0 = gcte::residuals_of(base, x, y);
    Matrix r1 = gcte::residuals_of(rescaled, scaled, y);
    CHECK((r0 - r1).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(rescaled.coefficients(1, 0) ==
          doctest::Approx(base.coefficients(1, 0) / 1000.0).epsilon(1e-9));
}

TEST_CASE("degenerate designs are rejected with the offending column") {
    gcte::CounterRng rng(7, 0);
    std::uint64_t cursor = 0;
    Matrix x(100, 3);
    x.leftCols(2) = normals(rng, cursor, 100, 2);
    x.col(2) = 2.0 * x.col(0) - x.col(1); // exact linear dependence
    Matrix y = normals(rng, cursor, 100, 1);
    try {
        gcte::ols_fit(x, y, {"a", "b", "c"});
        FAIL("expected CollinearRegressors");
    } catch (const gcte::CollinearRegressors& e) {
        CHECK(e.column == 2);
        CHECK(e.label == "c");
        CHECK(std::string(e.what()).find("c") != std::string::npos);
    }

    Matrix tiny(3, 4);
    tiny.setZero();
    Matrix ty(3, 1);
    ty.setZero();
    CHECK_THROWS_AS(gcte::ols_fit(tiny, ty), gcte::InsufficientData);

    Matrix mismatched = normals(rng, cursor, 40, 2);
    CHECK_THROWS_AS(gcte::ols_fit(mismatched, y), gcte::ShapeError);
}
