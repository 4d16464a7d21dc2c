#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gcte/linalg.hpp"

namespace gcte {

// Multivariate time series: rows are time steps (oldest first), columns are
// variables. Entries must be finite; missing values are rejected outright
// rather than imputed.
class TimeSeriesPanel {
public:
    TimeSeriesPanel(Matrix values, std::vector<std::string> var_names);

    int num_steps() const { return static_cast<int>(values_.rows()); }
    int num_vars() const { return static_cast<int>(values_.cols()); }
    const Matrix& values() const { return values_; }
    const std::vector<std::string>& var_names() const { return var_names_; }

    int column_of(const std::string& name) const; // DataError when unknown
    TimeSeriesPanel select(const std::vector<int>& columns) const;

private:
    Matrix values_;
    std::vector<std::string> var_names_;
};

// Lag orders for the three variable roles: p for the predictee's own past,
// q for the predictor, r for the conditioning set. p and q must be at
// least 1; r may be 0 (or the conditioning set may be absent entirely).
struct LagSpec {
    int p = 1;
    int q = 1;
    int r = 0;

    static constexpr int kMaxLag = 100;
    void validate() const; // QueryError on violation
    int max_lag() const { return p > q ? (p > r ? p : r) : (q > r ? q : r); }
};

// Stacked-lag embedding: row i of the result holds the observation at time
// t = lags-1+i followed by the previous lags-1 observations, most recent
// first. For a panel with T rows the result has T-lags+1 rows and
// lags*num_vars columns. lags = 1 returns the panel values unchanged.
Matrix lagged_embedding(const TimeSeriesPanel& panel, int lags);

// Aligned regression blocks for one causality query. Targets are the
// predictee at time t; the restricted design holds the predictee's own p
// lags plus r lags of the conditioning block; the full design appends q
// lags of the predictor. All blocks share the common estimation window
// t = max(p,q,r) .. T-1, so restricted and full regressions see identical
// rows.
struct LaggedDesign {
    Matrix target;
    Matrix restricted;
    Matrix full;
    int effective_rows = 0;
    std::vector<std::string> restricted_labels; // e.g. "X[t-1]"
    std::vector<std::string> full_labels;
};

// conditioning may be null (equivalent to r = 0). All panels must share
// the same number of rows. Throws InsufficientData when the panel is too
// short for the requested lags, stating the required minimum length.
LaggedDesign build_designs(const TimeSeriesPanel& predictee,
                           const TimeSeriesPanel& predictor,
                           const TimeSeriesPanel* conditioning, const LagSpec& lags);

// Sample moments with denominator N (maximum-likelihood convention); the
// column means are always removed. Fewer than two rows is InsufficientData.
struct MeanCov {
    Vector mean;
    SpdMatrix cov; // permissive: constant columns give zero rows, flagged degenerate
};
MeanCov sample_mean_cov(const Matrix& a);

struct MeanCrossCov {
    Vector mean_a;
    Vector mean_b;
    CrossCovariance cov; // cov(a_i, b_j), rows index a
};
MeanCrossCov sample_mean_cov(const Matrix& a, const Matrix& b);

// CSV with a mandatory header row of variable names, one time step per
// line. Rejects ragged rows, non-numeric fields, and empty cells.
TimeSeriesPanel read_csv_panel(std::istream& in);
TimeSeriesPanel read_csv_panel(const std::string& path);
void write_csv_panel(std::ostream& out, const TimeSeriesPanel& panel);
void write_csv_panel(const std::string& path, const TimeSeriesPanel& panel);

} // namespace gcte
