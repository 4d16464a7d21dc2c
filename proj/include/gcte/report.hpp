#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcte/causality.hpp"
#include "gcte/stats.hpp"

namespace gcte {

// Structured text emitted by the analyze command: one `key value` line per
// field in a fixed order, bracketed by a format header and "end". The same
// document serves humans and machine consumers; serialization round-trips
// losslessly (reals carry 17 significant digits) and carries everything
// needed to reproduce the run (lags, sample counts, seed, version).
struct AnalysisReport {
    std::string tool_version;
    std::vector<std::string> predictee;
    std::vector<std::string> predictor;
    std::vector<std::string> conditioning;
    int lag_p = 1;
    int lag_q = 1;
    int lag_r = 0;
    int num_obs = 0;
    int effective_obs = 0;
    double jitter = 0.0;
    double granger_f = 0.0;
    double transfer_entropy = 0.0;
    double equivalence_gap = 0.0;
    bool equivalence_ok = false; // gap <= 1e-12
    double restricted_logdet = 0.0;
    double full_logdet = 0.0;
    int dof = 0;
    std::string test_method; // "chi2" or "perm"
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool rejected = false;
    int permutations = 0; // 0 for the asymptotic test
    std::uint64_t seed = 0;
    double regressor_min_pivot = 0.0;
    double residual_min_pivot = 0.0;

    std::string to_text() const;
    static AnalysisReport from_text(const std::string& text); // DataError on malformed input
};

// Assemble a report from one analysis. `significance` may reflect either
// test method; alpha drives the rejected flag.
AnalysisReport make_report(const CausalityQuery& query, const TimeSeriesPanel& panel,
                           const CausalityResult& result,
                           const SignificanceResult& significance, double alpha,
                           std::uint64_t seed);

} // namespace gcte
