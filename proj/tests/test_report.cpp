#include "doctest.h"

#include <string>
#include <vector>

#include "gcte/causality.hpp"
#include "gcte/report.hpp"
#include "gcte/series.hpp"
#include "gcte/stats.hpp"
#include "gcte/var_sim.hpp"
#include "gcte/version.hpp"

using gcte::AnalysisReport;
using gcte::CausalityQuery;
using gcte::LagSpec;
using gcte::Matrix;
using gcte::SpdMatrix;
using gcte::TimeSeriesPanel;
using gcte::VarModel;

namespace {

AnalysisReport sample_report(const std::string& method) {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 0) = 0.5;
    a(0, 1) = 0.35;
    a(1, 1) = 0.6;
    a(2, 2) = 0.4;
    VarModel model({a}, SpdMatrix(Matrix::Identity(3, 3)), {"x", "y", "z"});
    TimeSeriesPanel panel = gcte::simulate(model, 1200, 2718);

    CausalityQuery q;
    q.predictee_cols = {0};
    q.predictor_cols = {1};
    q.conditioning_cols = {2};
    q.lags = LagSpec{2, 1, 1};

    gcte::CausalityResult result = gcte::equivalence_report(q, panel, 1e-9);
    gcte::SignificanceResult sig;
    if (method == "perm") {
        sig = gcte::permutation_test(q, panel, 120, 99, 2, 1e-9);
    } else {
        sig.statistic = result.statistic;
        sig.dof = result.dof;
        sig.p_value = result.p_value;
        sig.method = gcte::TestMethod::chi2_asymptotic;
    }
    return gcte::make_report(q, panel, result, sig, 0.01, 99);
}

} // namespace

TEST_CASE("reports serialize and re-parse losslessly") {
    for (const std::string method : {"chi2", "perm"}) {
        AnalysisReport r = sample_report(method);
        CHECK(r.tool_version == gcte::kToolVersion);
        CHECK(r.predictee == std::vector<std::string>{"x"});
        CHECK(r.predictor == std::vector<std::string>{"y"});
        CHECK(r.conditioning == std::vector<std::string>{"z"});
        CHECK(r.test_method == method);
        CHECK(r.equivalence_ok);
        CHECK(r.jitter == 1e-9);
        CHECK(r.seed == 99);

        const std::string text = r.to_text();
        AnalysisReport back = AnalysisReport::from_text(text);
        CHECK(back.tool_version == r.tool_version);
        CHECK(back.predictee == r.predictee);
        CHECK(back.predictor == r.predictor);
        CHECK(back.conditioning == r.conditioning);
        CHECK(back.lag_p == r.lag_p);
        CHECK(back.lag_q == r.lag_q);
        CHECK(back.lag_r == r.lag_r);
        CHECK(back.num_obs == r.num_obs);
        CHECK(back.effective_obs == r.effective_obs);
        CHECK(back.jitter == r.jitter);
        CHECK(back.granger_f == r.granger_f);
        CHECK(back.transfer_entropy == r.transfer_entropy);
        CHECK(back.equivalence_gap == r.equivalence_gap);
        CHECK(back.equivalence_ok == r.equivalence_ok);
        CHECK(back.restricted_logdet == r.restricted_logdet);
        CHECK(back.full_logdet == r.full_logdet);
        CHECK(back.dof == r.dof);
        CHECK(back.test_method == r.test_method);
        CHECK(back.statistic == r.statistic);
        CHECK(back.p_value == r.p_value);
        CHECK(back.alpha == r.alpha);
        CHECK(back.rejected == r.rejected);
        CHECK(back.permutations == r.permutations);
        CHECK(back.seed == r.seed);
        CHECK(back.regressor_min_pivot == r.regressor_min_pivot);
        CHECK(back.residual_min_pivot == r.residual_min_pivot);

        // the round trip is a fixed point at the text level too
        CHECK(back.to_text() == text);
    }
}

TEST_CASE("an unconditional report spells out the empty role") {
    AnalysisReport r = sample_report("chi2");
    r.conditioning.clear();
    const std::string text = r.to_text();
    CHECK(text.find("conditioning (none)") != std::string::npos);
    AnalysisReport back = AnalysisReport::from_text(text);
    CHECK(back.conditioning.empty());
}

TEST_CASE("malformed report text is rejected with a line number") {
    AnalysisReport r = sample_report("chi2");
    const std::string text = r.to_text();

    CHECK_THROWS_AS(AnalysisReport::from_text(""), gcte::DataError);
    CHECK_THROWS_AS(AnalysisReport::from_text("bogus 1\n"), gcte::DataError);

    // truncation: drop the trailing "end"
    std::string truncated = text.substr(0, text.rfind("end"));
    CHECK_THROWS_AS(AnalysisReport::from_text(truncated), gcte::DataError);

    // a field out of order breaks the fixed schema
    std::string swapped = text;
    const auto p_pos = swapped.find("\nlag_p");
    const auto q_pos = swapped.find("\nlag_q");
    REQUIRE(p_pos != std::string::npos);
    REQUIRE(q_pos != std::string::npos);
    swapped.replace(p_pos, 6, "\nlag_q");
    swapped.replace(q_pos, 6, "\nlag_p");
    CHECK_THROWS_AS(AnalysisReport::from_text(swapped), gcte::DataError);

    // a non-numeric value where a real is required
    std::string corrupt = text;
    const auto f_pos = corrupt.find("granger_f ");
    REQUIRE(f_pos != std::string::npos);
    const auto eol = corrupt.find('\n', f_pos);
    corrupt.replace(f_pos, eol - f_pos, "granger_f banana");
    try {
        AnalysisReport::from_text(corrupt);
        FAIL("expected DataError");
    } catch (const gcte::DataError& e) {
        CHECK(std::string(e.what()).find("granger_f") != std::string::npos);
    }
}
