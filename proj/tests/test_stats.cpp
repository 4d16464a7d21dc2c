#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <limits>

#include "gcte/causality.hpp"
#include "gcte/series.hpp"
#include "gcte/stats.hpp"
#include "gcte/var_sim.hpp"

using gcte::CausalityQuery;
using gcte::LagSpec;
using gcte::Matrix;
using gcte::SpdMatrix;
using gcte::TimeSeriesPanel;
using gcte::VarModel;

namespace {

// Chi-squared upper tail by Simpson integration of the density, using the
// standard-library lgamma for the normalizer. Nothing here is shared with
// the production series/continued-fraction implementation.
double chi2_tail_by_quadrature(double x, int dof) {
    const double a = 0.5 * dof;
    const double log_norm = -a * std::log(2.0) - std::lgamma(a);
    auto pdf = [&](double t) {
        if (t <= 0.0) return 0.0;
        return std::exp(log_norm + (a - 1.0) * std::log(t) - 0.5 * t);
    };
    const double upper = x + 90.0; // the remaining tail is ~e^{-45}
    const int intervals = 72000;   // even; fine enough for the dof=1 spike
    const double h = (upper - x) / intervals;
    double acc = pdf(x) + pdf(upper);
    for (int i = 1; i < intervals; ++i)
        acc += pdf(x + h * i) * (i % 2 == 1 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

VarModel coupled_model(double coupling) {
    Matrix a(2, 2);
    a << 0.5, coupling, 0.0, 0.7;
    return VarModel({a}, SpdMatrix(Matrix::Identity(2, 2)), {"x", "y"});
}

CausalityQuery y_to_x() {
    CausalityQuery q;
    q.predictee_cols = {0};
    q.predictor_cols = {1};
    q.lags = LagSpec{1, 1, 0};
    return q;
}

} // namespace

TEST_CASE("chi-squared tail at frozen quantiles") {
    // zero statistic keeps all the mass
    CHECK(gcte::chi2_upper_tail(0.0, 1) == 1.0);
    CHECK(gcte::chi2_upper_tail(0.0, 7) == 1.0);

    // dof = 2 has the closed form exp(-x/2)
    const double x20 = 2.0 * std::log(20.0);
    CHECK(gcte::chi2_upper_tail(x20, 2) == doctest::Approx(0.05).epsilon(1e-13));
    CHECK(gcte::chi2_upper_tail(1.386, 2) ==
          doctest::Approx(std::exp(-0.693)).epsilon(1e-12));

    // 95th percentiles, dof 1..5
    CHECK(gcte::chi2_upper_tail(3.841458820694124, 1) ==
          doctest::Approx(0.05).epsilon(1e-12));
    CHECK(gcte::chi2_upper_tail(5.991464547107979, 2) ==
          doctest::Approx(0.05).epsilon(1e-12));
    CHECK(gcte::chi2_upper_tail(7.814727903251179, 3) ==
          doctest::Approx(0.05).epsilon(1e-12));
    CHECK(gcte::chi2_upper_tail(9.487729036781154, 4) ==
          doctest::Approx(0.05).epsilon(1e-12));
    CHECK(gcte::chi2_upper_tail(11.070497693516351, 5) ==
          doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("chi-squared tail matches direct quadrature of the density") {
    for (int dof : {1, 3, 5, 8}) {
        for (double x : {0.5, 2.0, 6.0, 15.0}) {
            const double got = gcte::chi2_upper_tail(x, dof);
            const double oracle = chi2_tail_by_quadrature(x, dof);
            CHECK(std::abs(got - oracle) <= 1e-9);
        }
    }
}

TEST_CASE("chi-squared tail is monotone in both arguments") {
    double prev = 1.0;
    for (double x = 0.5; x < 30.0; x += 0.5) {
        const double p = gcte::chi2_upper_tail(x, 3);
        CHECK(p < prev);
        prev = p;
    }
    for (int dof = 1; dof < 10; ++dof)
        CHECK(gcte::chi2_upper_tail(5.0, dof) <
              gcte::chi2_upper_tail(5.0, dof + 1));
}

TEST_CASE("chi-squared tail rejects nonsense") {
    CHECK_THROWS_AS(gcte::chi2_upper_tail(-1.0, 2), gcte::QueryError);
    CHECK_THROWS_AS(gcte::chi2_upper_tail(1.0, 0), gcte::QueryError);
    CHECK_THROWS_AS(
        gcte::chi2_upper_tail(std::numeric_limits<double>::quiet_NaN(), 2),
        gcte::QueryError);
}

TEST_CASE("asymptotic test scales the estimate by the sample count") {
    gcte::SignificanceResult r = gcte::chi2_test(0.01, 1000, 1, 2, 3);
    CHECK(r.statistic == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(r.dof == 6);
    CHECK(r.method == gcte::TestMethod::chi2_asymptotic);
    CHECK(r.p_value == doctest::Approx(gcte::chi2_upper_tail(10.0, 6)).epsilon(1e-15));

    CHECK_THROWS_AS(gcte::chi2_test(0.5, 6, 1, 2, 3), gcte::InsufficientData);
    CHECK_THROWS_AS(gcte::chi2_test(-0.1, 1000, 1, 1, 1), gcte::QueryError);
}

TEST_CASE("permutation test is calibrated under the null") {
    VarModel null_model = coupled_model(0.0);
    CausalityQuery q = y_to_x();
    int rejections = 0;
    for (int i = 0; i < 20; ++i) {
        TimeSeriesPanel panel =
            gcte::simulate(null_model, 400, 2000 + static_cast<std::uint64_t>(i));
        gcte::SignificanceResult r =
            gcte::permutation_test(q, panel, 199, 31 + static_cast<std::uint64_t>(i));
        CHECK(r.method == gcte::TestMethod::permutation);
        CHECK(r.num_permutations == 199);
        CHECK(r.p_value >= 1.0 / 200.0); // can never reach zero
        CHECK(r.p_value <= 1.0);
        if (r.p_value < 0.05) ++rejections;
    }
    // Binomial(20, 0.05): P(more than 4) < 0.0003
    CHECK(rejections <= 4);
}

TEST_CASE("permutation test detects a strong coupling") {
    VarModel model = coupled_model(0.4);
    TimeSeriesPanel panel = gcte::simulate(model, 2000, 555);
    gcte::SignificanceResult r =
        gcte::permutation_test(y_to_x(), panel, 999, 1);
    // no surrogate beats the observed statistic
    CHECK(r.p_value == doctest::Approx(0.001).epsilon(1e-15));
}

TEST_CASE("permutation p-value is independent of the thread count") {
    VarModel model = coupled_model(0.15);
    TimeSeriesPanel panel = gcte::simulate(model, 600, 9090);
    CausalityQuery q = y_to_x();
    const double p1 = gcte::permutation_test(q, panel, 250, 7, 1).p_value;
    const double p3 = gcte::permutation_test(q, panel, 250, 7, 3).p_value;
    const double p8 = gcte::permutation_test(q, panel, 250, 7, 8).p_value;
    CHECK(p1 == p3);
    CHECK(p1 == p8);
}

TEST_CASE("permutation test input validation") {
    VarModel model = coupled_model(0.2);
    TimeSeriesPanel panel = gcte::simulate(model, 300, 1);
    CHECK_THROWS_AS(gcte::permutation_test(y_to_x(), panel, 99, 1),
                    gcte::QueryError);

    // too short for any valid rotation offset
    TimeSeriesPanel tiny = gcte::simulate(model, 30, 1);
    CausalityQuery q = y_to_x();
    q.lags = LagSpec{14, 14, 0};
    CHECK_THROWS_AS(gcte::permutation_test(q, tiny, 100, 1),
                    gcte::InsufficientData);
}

TEST_CASE("permutation test works with a conditioning block") {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 0) = 0.5;
    a(0, 1) = 0.3;
    a(1, 1) = 0.6;
    a(2, 2) = 0.4;
    VarModel model({a}, SpdMatrix(Matrix::Identity(3, 3)), {"x", "y", "z"});
    TimeSeriesPanel panel = gcte::simulate(model, 1500, 8);
    CausalityQuery q;
    q.predictee_cols = {0};
    q.predictor_cols = {1};
    q.conditioning_cols = {2};
    q.lags = LagSpec{1, 1, 1};
    gcte::SignificanceResult r = gcte::permutation_test(q, panel, 199, 3);
    CHECK(r.p_value < 0.05); // the direct y -> x link is strong
}
