#include "gcte/stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "gcte/rng.hpp"

namespace gcte {

namespace {

constexpr int kGammaMaxIter = 500;
constexpr double kGammaEps = 3e-16;
constexpr double kTiny = 1e-300;

// Lower regularized incomplete gamma P(a,s) by power series; valid and
// fast for s < a+1.
double gamma_p_series(double a, double s) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < kGammaMaxIter; ++i) {
        ap += 1.0;
        del *= s / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * kGammaEps)
            return sum * std::exp(-s + a * std::log(s) - std::lgamma(a));
    }
    throw ConvergenceError("incomplete gamma series did not converge");
}

// Upper regularized incomplete gamma Q(a,s) by modified-Lentz continued
// fraction; valid and fast for s >= a+1.
double gamma_q_cf(double a, double s) {
    double b = s + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kGammaMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kGammaEps)
            return h * std::exp(-s + a * std::log(s) - std::lgamma(a));
    }
    throw ConvergenceError("incomplete gamma continued fraction did not converge");
}

} // namespace

double chi2_upper_tail(double x, int dof) {
    if (dof < 1) throw QueryError("chi2_upper_tail: dof must be positive");
    if (!std::isfinite(x)) throw QueryError("chi2_upper_tail: x must be finite");
    if (x < 0.0) throw QueryError("chi2_upper_tail: x must be non-negative");
    if (x == 0.0) return 1.0;
    const double a = 0.5 * dof;
    const double s = 0.5 * x;
    if (s < a + 1.0) return 1.0 - gamma_p_series(a, s);
    return gamma_q_cf(a, s);
}

SignificanceResult chi2_test(double f, int num_obs, int predictee_dim,
                             int predictor_dim, int predictor_lags) {
    if (f < 0.0) throw QueryError("chi2_test: statistic must be non-negative");
    if (predictee_dim < 1 || predictor_dim < 1 || predictor_lags < 1)
        throw QueryError("chi2_test: dimensions and predictor lags must be positive");
    const int dof = predictee_dim * predictor_dim * predictor_lags;
    if (num_obs <= dof)
        throw InsufficientData("chi2_test: " + std::to_string(num_obs) +
                               " observations for " + std::to_string(dof) +
                               " degrees of freedom; asymptotics need num_obs > dof");
    SignificanceResult r;
    r.statistic = static_cast<double>(num_obs) * f;
    r.dof = dof;
    r.p_value = chi2_upper_tail(r.statistic, dof);
    r.method = TestMethod::chi2_asymptotic;
    return r;
}

namespace {

// Panel with the predictor columns cyclically rotated by `offset`: row t of
// a rotated column holds the original value at (t + offset) mod T.
TimeSeriesPanel rotate_predictors(const TimeSeriesPanel& panel,
                                  const std::vector<int>& predictor_cols,
                                  int offset) {
    Matrix values = panel.values();
    const int t_len = panel.num_steps();
    for (int c : predictor_cols) {
        for (int t = 0; t < t_len; ++t)
            values(t, c) = panel.values()((t + offset) % t_len, c);
    }
    return TimeSeriesPanel(std::move(values), panel.var_names());
}

} // namespace

SignificanceResult permutation_test(const CausalityQuery& query,
                                    const TimeSeriesPanel& panel,
                                    int num_permutations, std::uint64_t seed,
                                    int threads, double jitter) {
    if (num_permutations < 100)
        throw QueryError("permutation_test: need at least 100 permutations, got " +
                         std::to_string(num_permutations));
    if (threads < 1) threads = 1;

    GrangerEstimate observed = estimate_causality(query, panel, jitter);
    const double f_obs = observed.path.granger_f;

    const int max_lag = query.lags.max_lag();
    const int lo = max_lag;
    const int hi = panel.num_steps() - max_lag;
    if (hi - lo < 1)
        throw InsufficientData(
            "permutation_test: only " + std::to_string(hi - lo + 1) +
            " usable rotation offsets; need a longer series relative to the lags");

    // Offsets are a pure function of (seed, trial index): any partition of
    // trials over threads counts the same exceedances.
    CounterRng rng(seed, /*stream=*/1);
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);

    std::vector<int> counts(static_cast<std::size_t>(threads), 0);
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&](int which, int begin, int end) {
        try {
            int exceed = 0;
            for (int trial = begin; trial < end; ++trial) {
                const int offset =
                    lo + static_cast<int>(
                             rng.uniform_below(static_cast<std::uint64_t>(trial), span));
                TimeSeriesPanel rotated =
                    rotate_predictors(panel, query.predictor_cols, offset);
                GrangerEstimate perm = estimate_causality(query, rotated, jitter);
                if (perm.path.granger_f >= f_obs) ++exceed;
            }
            counts[static_cast<std::size_t>(which)] = exceed;
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };

    if (threads == 1) {
        worker(0, 0, num_permutations);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (num_permutations + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const int begin = w * chunk;
            const int end = std::min(num_permutations, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, w, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    int exceed = 0;
    for (int c : counts) exceed += c;

    SignificanceResult r;
    r.statistic = static_cast<double>(observed.effective_obs) * f_obs;
    r.dof = observed.dof;
    r.p_value = (1.0 + exceed) / (1.0 + num_permutations);
    r.method = TestMethod::permutation;
    r.num_permutations = num_permutations;
    return r;
}

} // namespace gcte
