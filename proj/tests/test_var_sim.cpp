#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "gcte/causality.hpp"
#include "gcte/series.hpp"
#include "gcte/var_sim.hpp"

using gcte::CausalityQuery;
using gcte::LagSpec;
using gcte::Matrix;
using gcte::SpdMatrix;
using gcte::TimeSeriesPanel;
using gcte::VarModel;

namespace {

Matrix scalar_block(double a) { return Matrix::Constant(1, 1, a); }

VarModel canonical_model() {
    Matrix a(2, 2);
    a << 0.5, 0.4, 0.0, 0.7;
    return VarModel({a}, SpdMatrix(Matrix::Identity(2, 2)), {"x", "y"});
}

} // namespace

TEST_CASE("spectral radius of known coefficient sets") {
    // diagonal: radius is the largest |entry|
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 0.5;
    d(1, 1) = 0.7;
    CHECK(gcte::stationarity_check({d}) == doctest::Approx(0.7).epsilon(1e-9));

    // triangular coupling does not change the eigenvalues
    d(0, 1) = 0.4;
    CHECK(gcte::stationarity_check({d}) == doctest::Approx(0.7).epsilon(1e-9));

    CHECK(gcte::stationarity_check({scalar_block(0.5)}) ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(gcte::stationarity_check({Matrix::Zero(3, 3)}) == 0.0);

    // order 2 scalar: z^2 - 0.5 z - 0.24 = (z - 0.8)(z + 0.3)
    CHECK(gcte::stationarity_check({scalar_block(0.5), scalar_block(0.24)}) ==
          doctest::Approx(0.8).epsilon(1e-9));

    // rotation scaled by 0.9: complex pair of modulus 0.9
    const double th = 0.7;
    Matrix rot(2, 2);
    rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    CHECK(gcte::stationarity_check({Matrix(0.9 * rot)}) ==
          doctest::Approx(0.9).epsilon(1e-8));

    CHECK_THROWS_AS(gcte::stationarity_check({}), gcte::ModelError);
    CHECK_THROWS_AS(gcte::stationarity_check({Matrix::Zero(2, 3)}),
                    gcte::ShapeError);
}

TEST_CASE("model construction enforces stationarity") {
    CHECK_THROWS_AS(VarModel({scalar_block(1.0)}, SpdMatrix(Matrix::Identity(1, 1))),
                    gcte::ModelError);
    try {
        VarModel({scalar_block(1.2)}, SpdMatrix(Matrix::Identity(1, 1)));
        FAIL("expected ModelError");
    } catch (const gcte::ModelError& e) {
        CHECK(std::string(e.what()).find("1.2") != std::string::npos);
    }

    VarModel ok({scalar_block(0.7)}, SpdMatrix(Matrix::Identity(1, 1)));
    CHECK(ok.default_burn_in() == 34); // ceil(10 / 0.3)
    CHECK(ok.var_names() == std::vector<std::string>{"x1"});

    CHECK_THROWS_AS(VarModel({scalar_block(0.5)}, SpdMatrix(Matrix::Identity(2, 2))),
                    gcte::ShapeError);
    CHECK_THROWS_AS(
        VarModel({scalar_block(0.5)}, SpdMatrix(Matrix::Identity(1, 1)), {"a", "b"}),
        gcte::ShapeError);
}

TEST_CASE("simulation is reproducible and stream-separated") {
    VarModel model = canonical_model();
    TimeSeriesPanel a = gcte::simulate(model, 500, 11);
    TimeSeriesPanel b = gcte::simulate(model, 500, 11);
    CHECK(a.values() == b.values());
    CHECK(a.var_names() == std::vector<std::string>{"x", "y"});

    TimeSeriesPanel c = gcte::simulate(model, 500, 12);
    CHECK(a.values() != c.values());
    TimeSeriesPanel d = gcte::simulate(model, 500, 11, -1, 1);
    CHECK(a.values() != d.values());

    // a longer run begins with the same values: the innovation at step t
    // does not depend on how many steps are requested
    TimeSeriesPanel e = gcte::simulate(model, 800, 11);
    CHECK(e.values().topRows(500) == a.values());

    CHECK_THROWS_AS(gcte::simulate(model, 0, 1), gcte::QueryError);
}

TEST_CASE("white noise autocovariance is the noise covariance") {
    Matrix noise(2, 2);
    noise << 1.5, 0.4, 0.4, 0.9;
    VarModel model({Matrix::Zero(2, 2)}, SpdMatrix(noise));
    std::vector<Matrix> gamma = gcte::stationary_autocov(model, 3);
    REQUIRE(gamma.size() == 4);
    CHECK((gamma[0] - noise).cwiseAbs().maxCoeff() < 1e-12);
    for (int j = 1; j <= 3; ++j)
        CHECK(gamma[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("AR(1) autocovariance and sample moments") {
    const double a = 0.9;
    VarModel model({scalar_block(a)}, SpdMatrix(Matrix::Identity(1, 1)));
    std::vector<Matrix> gamma = gcte::stationary_autocov(model, 4);
    const double g0 = 1.0 / (1.0 - a * a);
    for (int j = 0; j <= 4; ++j)
        CHECK(gamma[static_cast<std::size_t>(j)](0, 0) ==
              doctest::Approx(std::pow(a, j) * g0).epsilon(1e-10));

    // a long sample agrees within the autocorrelation-inflated band:
    // var(sample variance) ~ 2 g0^2 (1+a^2)/(1-a^2) / N
    const int n = 200000;
    TimeSeriesPanel panel = gcte::simulate(model, n, 321);
    gcte::MeanCov mc = gcte::sample_mean_cov(panel.values());
    const double se =
        g0 * std::sqrt(2.0 * (1 + a * a) / (1 - a * a) / n);
    CHECK(std::abs(mc.cov.values()(0, 0) - g0) < 4.0 * se);
}

TEST_CASE("canonical model moments match hand-derived closed forms") {
    VarModel model = canonical_model();
    // scalar fixed-point algebra, done with plain arithmetic on purpose
    const double syy = 1.0 / (1.0 - 0.49);
    const double sxy = 0.28 * syy / (1.0 - 0.35);
    const double sxx = (0.16 * syy + 0.4 * sxy + 1.0) / (1.0 - 0.25);
    const double g1xx = 0.5 * sxx + 0.4 * sxy;

    std::vector<Matrix> gamma = gcte::stationary_autocov(model, 1);
    CHECK(gamma[0](0, 0) == doctest::Approx(sxx).epsilon(1e-12));
    CHECK(gamma[0](0, 1) == doctest::Approx(sxy).epsilon(1e-12));
    CHECK(gamma[0](1, 1) == doctest::Approx(syy).epsilon(1e-12));
    CHECK(gamma[1](0, 0) == doctest::Approx(g1xx).epsilon(1e-12));
    // Gamma_1 = A Gamma_0 for a VAR(1)
    CHECK((gamma[1] - model.coeff_blocks()[0] * gamma[0]).cwiseAbs().maxCoeff() <
          1e-12);

    // restricted regression of x_t on x_{t-1} leaves sxx - g1xx^2/sxx;
    // the full regression recovers the unit noise exactly
    const double restricted = sxx - g1xx * g1xx / sxx;
    CausalityQuery q;
    q.predictee_cols = {0};
    q.predictor_cols = {1};
    q.lags = LagSpec{1, 1, 0};
    const double f = gcte::analytic_granger(model, q);
    CHECK(f == doctest::Approx(std::log(restricted)).epsilon(1e-12));
    CHECK(gcte::analytic_transfer_entropy(model, q) ==
          doctest::Approx(0.5 * std::log(restricted)).epsilon(1e-12));

    gcte::CovPathResult path = gcte::analytic_causality(model, q);
    CHECK(path.restricted_residual_cov.values()(0, 0) ==
          doctest::Approx(restricted).epsilon(1e-12));
    CHECK(path.full_residual_cov.values()(0, 0) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("no coupling means exactly zero analytic causality") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 0.5;
    a(1, 1) = 0.7;
    VarModel diag_model({a}, SpdMatrix(Matrix::Identity(2, 2)));
    CausalityQuery q;
    q.predictee_cols = {0};
    q.predictor_cols = {1};
    q.lags = LagSpec{1, 1, 0};
    CHECK(gcte::analytic_granger(diag_model, q) == 0.0);
    CHECK(gcte::analytic_transfer_entropy(diag_model, q) == 0.0);
}

TEST_CASE("sampled autocovariance approaches the analytic one") {
    VarModel model = canonical_model();
    std::vector<Matrix> gamma = gcte::stationary_autocov(model, 1);
    const int n = 300000;
    TimeSeriesPanel panel = gcte::simulate(model, n, 777);
    const Matrix& v = panel.values();
    Matrix centered = v.rowwise() - v.colwise().mean();
    Matrix g0 = centered.transpose() * centered / n;
    Matrix g1 = centered.bottomRows(n - 1).transpose() * centered.topRows(n - 1) /
                (n - 1);
    CHECK((g0 - gamma[0]).cwiseAbs().maxCoeff() < 0.05);
    CHECK((g1 - gamma[1]).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("deeper lag orders than the true model change nothing in population") {
    VarModel model = canonical_model();
    CausalityQuery q;
    q.predictee_cols = {0};
    q.predictor_cols = {1};
    q.lags = LagSpec{1, 1, 0};
    const double f1 = gcte::analytic_granger(model, q);
    q.lags = LagSpec{3, 2, 0};
    gcte::CovPathResult deep = gcte::analytic_causality(model, q);
    // the full model still ends at the unit innovation variance
    CHECK(deep.full_residual_cov.values()(0, 0) ==
          doctest::Approx(1.0).epsilon(1e-10));
    // extra predictee lags absorb part of what y explained; the measure
    // stays strictly positive here because y[t-1] carries unique signal
    CHECK(deep.granger_f > 0.0);
    CHECK(deep.granger_f <= f1 + 1e-12);
}

TEST_CASE("model files round-trip and reject garbage") {
    Matrix a1(2, 2), a2(2, 2), noise(2, 2);
    a1 << 0.31, -0.12, 0.05, 0.4;
    a2 << 0.1, 0.07, -0.03, 0.2;
    noise << 1.1, 0.3, 0.3, 0.8;
    VarModel model({a1, a2}, SpdMatrix(noise), {"north", "south"});

    std::ostringstream out;
    gcte::write_model_file(out, model, 424242);
    std::istringstream in(out.str());
    gcte::ModelFile back = gcte::parse_model_file(in);
    CHECK(back.seed == 424242);
    CHECK(back.model.var_names() == model.var_names());
    REQUIRE(back.model.coeff_blocks().size() == 2);
    CHECK(back.model.coeff_blocks()[0] == a1);
    CHECK(back.model.coeff_blocks()[1] == a2);
    CHECK(back.model.noise_cov().values() == model.noise_cov().values());

    auto parse = [](const std::string& text) {
        std::istringstream s(text);
        return gcte::parse_model_file(s);
    };
    CHECK_THROWS_AS(parse(""), gcte::ModelError);
    CHECK_THROWS_AS(parse("not_a_model 1\n"), gcte::ModelError);
    // version bump is rejected
    CHECK_THROWS_AS(parse("gcte_var_model 2\ndim 1\n"), gcte::ModelError);
    // blocks out of order
    std::string text = out.str();
    const auto pos = text.find("coeff_block 1");
    std::string reordered = text;
    reordered.replace(pos, 13, "coeff_block 2");
    CHECK_THROWS_AS(parse(reordered), gcte::ModelError);
    // trailing content
    CHECK_THROWS_AS(parse(text + "\nextra"), gcte::ModelError);
    // a non-stationary model is rejected at parse time, naming the radius
    std::string unstable =
        "gcte_var_model 1\ndim 1\norder 1\nseed 0\nnames u\n"
        "coeff_block 1\n1.5\nnoise_cov\n1\nend\n";
    try {
        parse(unstable);
        FAIL("expected ModelError");
    } catch (const gcte::ModelError& e) {
        CHECK(std::string(e.what()).find("1.5") != std::string::npos);
    }
}

TEST_CASE("burn-in control") {
    VarModel model = canonical_model();
    // burn-in zero starts from the zero state: first row is pure innovation
    TimeSeriesPanel raw = gcte::simulate(model, 10, 5, 0);
    TimeSeriesPanel cooked = gcte::simulate(model, 10, 5);
    CHECK(raw.values() != cooked.values());
    CHECK(model.default_burn_in() == 34);
    CHECK(gcte::simulate(model, 1, 5).num_steps() == 1);
}
