#pragma once

#include <cstdint>

#include "gcte/causality.hpp"
#include "gcte/series.hpp"

namespace gcte {

enum class TestMethod { chi2_asymptotic, permutation };

struct SignificanceResult {
    double statistic = 0.0; // effective sample count times the estimate
    int dof = 0;
    double p_value = 1.0;
    TestMethod method = TestMethod::chi2_asymptotic;
    int num_permutations = 0; // permutation method only
};

// Upper tail of the chi-squared distribution with `dof` degrees of
// freedom: Q(dof/2, x/2), the regularized upper incomplete gamma function,
// evaluated by power series or continued fraction to ~1e-14 relative.
double chi2_upper_tail(double x, int dof);

// Asymptotic test of the null "predictor does not cause predictee": the
// scaled estimate num_obs * f is chi-squared with predictee_dim *
// predictor_dim * predictor_lags degrees of freedom under the null.
// num_obs must exceed dof for the asymptotics to mean anything.
SignificanceResult chi2_test(double f, int num_obs, int predictee_dim,
                             int predictor_dim, int predictor_lags);

// Surrogate-data test: the predictor columns are cyclically rotated by
// random offsets in [max_lag, T - max_lag], which preserves the
// predictor's own autocorrelation while breaking its alignment with the
// other variables. p = (1 + #{F_perm >= F_obs}) / (1 + permutations), so
// p is never zero. Trial offsets come from per-trial counter substreams of
// the seed; results are identical for any thread count.
SignificanceResult permutation_test(const CausalityQuery& query,
                                    const TimeSeriesPanel& panel,
                                    int num_permutations, std::uint64_t seed,
                                    int threads = 1, double jitter = 0.0);

} // namespace gcte
