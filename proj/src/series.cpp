#include "gcte/series.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace gcte {

TimeSeriesPanel::TimeSeriesPanel(Matrix values, std::vector<std::string> var_names)
    : values_(std::move(values)), var_names_(std::move(var_names)) {
    if (static_cast<int>(var_names_.size()) != values_.cols())
        throw ShapeError("TimeSeriesPanel: " + std::to_string(var_names_.size()) +
                         " names for " + std::to_string(values_.cols()) + " columns");
    if (!values_.allFinite())
        throw DataError("TimeSeriesPanel: non-finite or missing values");
    std::set<std::string> seen;
    for (const auto& name : var_names_)
        if (!seen.insert(name).second)
            throw DataError("TimeSeriesPanel: duplicate column name '" + name + "'");
}

int TimeSeriesPanel::column_of(const std::string& name) const {
    for (int j = 0; j < num_vars(); ++j)
        if (var_names_[j] == name) return j;
    throw DataError("unknown column '" + name + "'");
}

TimeSeriesPanel TimeSeriesPanel::select(const std::vector<int>& columns) const {
    Matrix out(num_steps(), static_cast<int>(columns.size()));
    std::vector<std::string> names;
    names.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] < 0 || columns[j] >= num_vars())
            throw QueryError("column index " + std::to_string(columns[j]) +
                             " out of range");
        out.col(static_cast<int>(j)) = values_.col(columns[j]);
        names.push_back(var_names_[columns[j]]);
    }
    return TimeSeriesPanel(std::move(out), std::move(names));
}

void LagSpec::validate() const {
    if (p < 1 || q < 1)
        throw QueryError("lag orders p and q must be at least 1 (got p=" +
                         std::to_string(p) + ", q=" + std::to_string(q) + ")");
    if (r < 0) throw QueryError("conditioning lag order r must be non-negative");
    if (p > kMaxLag || q > kMaxLag || r > kMaxLag)
        throw QueryError("lag orders are capped at " + std::to_string(kMaxLag));
}

Matrix lagged_embedding(const TimeSeriesPanel& panel, int lags) {
    if (lags < 1) throw QueryError("lagged_embedding: lags must be at least 1");
    const int t_len = panel.num_steps();
    const int n = panel.num_vars();
    if (t_len <= lags)
        throw InsufficientData("lagged_embedding: need more than " +
                               std::to_string(lags) + " rows, got " +
                               std::to_string(t_len));
    const int rows = t_len - lags + 1;
    Matrix out(rows, lags * n);
    // Row i covers time t = lags-1+i; lag block a holds the value at t-a.
    for (int a = 0; a < lags; ++a)
        out.middleCols(a * n, n) = panel.values().middleRows(lags - 1 - a, rows);
    return out;
}

namespace {

void append_lag_block(const TimeSeriesPanel& panel, int lags, int max_lag,
                      Matrix& design, int col_offset,
                      std::vector<std::string>& labels) {
    // Embedding row j covers time lags-1+j; the design row for target time
    // t needs the block at time t-1, i.e. embedding row t-lags.
    Matrix emb = lagged_embedding(panel, lags);
    const int rows = panel.num_steps() - max_lag;
    design.middleCols(col_offset, lags * panel.num_vars()) =
        emb.middleRows(max_lag - lags, rows);
    for (int a = 1; a <= lags; ++a)
        for (const auto& name : panel.var_names())
            labels.push_back(name + "[t-" + std::to_string(a) + "]");
}

} // namespace

LaggedDesign build_designs(const TimeSeriesPanel& predictee,
                           const TimeSeriesPanel& predictor,
                           const TimeSeriesPanel* conditioning, const LagSpec& lags) {
    lags.validate();
    const int t_len = predictee.num_steps();
    if (predictor.num_steps() != t_len ||
        (conditioning && conditioning->num_steps() != t_len))
        throw ShapeError("build_designs: panels disagree on the number of time steps");

    const int dx = predictee.num_vars();
    const int dy = predictor.num_vars();
    const int dz = conditioning ? conditioning->num_vars() : 0;
    const int r = conditioning ? lags.r : 0;
    const int max_lag = std::max({lags.p, lags.q, r});
    const int full_cols = lags.p * dx + lags.q * dy + r * dz;

    // Enough rows both for the lag window itself and for moment estimates
    // that can support a regression with full_cols columns.
    const int required =
        std::max((dx + dy + dz) * max_lag + 2, max_lag + full_cols + 2);
    if (t_len < required)
        throw InsufficientData("build_designs: " + std::to_string(t_len) +
                               " rows, need at least " + std::to_string(required) +
                               " for lags (p=" + std::to_string(lags.p) +
                               ", q=" + std::to_string(lags.q) +
                               ", r=" + std::to_string(r) + ")");

    LaggedDesign d;
    d.effective_rows = t_len - max_lag;
    d.target = predictee.values().bottomRows(d.effective_rows);
    d.full.resize(d.effective_rows, full_cols);

    append_lag_block(predictee, lags.p, max_lag, d.full, 0, d.full_labels);
    append_lag_block(predictor, lags.q, max_lag, d.full, lags.p * dx, d.full_labels);
    if (conditioning && r > 0)
        append_lag_block(*conditioning, r, max_lag, d.full,
                         lags.p * dx + lags.q * dy, d.full_labels);

    // Restricted design = full design minus the predictor block.
    d.restricted.resize(d.effective_rows, full_cols - lags.q * dy);
    d.restricted.leftCols(lags.p * dx) = d.full.leftCols(lags.p * dx);
    if (r > 0)
        d.restricted.rightCols(r * dz) = d.full.rightCols(r * dz);
    for (int j = 0; j < lags.p * dx; ++j)
        d.restricted_labels.push_back(d.full_labels[static_cast<std::size_t>(j)]);
    for (int j = lags.p * dx + lags.q * dy; j < full_cols; ++j)
        d.restricted_labels.push_back(d.full_labels[static_cast<std::size_t>(j)]);
    return d;
}

MeanCov sample_mean_cov(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    if (n < 2)
        throw InsufficientData("sample_mean_cov: need at least 2 rows, got " +
                               std::to_string(n));
    Vector mean = a.colwise().mean();
    Matrix centered = a.rowwise() - mean.transpose();
    Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);
    cov = ((cov + cov.transpose()) * 0.5).eval();
    return {std::move(mean), SpdMatrix::semidefinite(std::move(cov))};
}

MeanCrossCov sample_mean_cov(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("sample_mean_cov: row counts differ (" +
                         std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) +
                         ")");
    const int n = static_cast<int>(a.rows());
    if (n < 2)
        throw InsufficientData("sample_mean_cov: need at least 2 rows, got " +
                               std::to_string(n));
    Vector mean_a = a.colwise().mean();
    Vector mean_b = b.colwise().mean();
    Matrix cov = ((a.rowwise() - mean_a.transpose()).transpose() *
                  (b.rowwise() - mean_b.transpose())) /
                 static_cast<double>(n);
    return {std::move(mean_a), std::move(mean_b), CrossCovariance(std::move(cov))};
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

} // namespace

TimeSeriesPanel read_csv_panel(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("csv: empty input, expected a header row");
    std::vector<std::string> names = split_csv_line(line);
    for (const auto& name : names)
        if (name.empty()) throw DataError("csv: empty column name in header");

    std::vector<double> data;
    int rows = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != names.size())
            throw DataError("csv line " + std::to_string(line_no) + ": " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(names.size()));
        for (const auto& field : fields) {
            if (field.empty())
                throw DataError("csv line " + std::to_string(line_no) +
                                ": empty cell (missing values are not supported)");
            const char* begin = field.c_str();
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end != begin + field.size())
                throw DataError("csv line " + std::to_string(line_no) +
                                ": cannot parse '" + field + "' as a number");
            data.push_back(v);
        }
        ++rows;
    }
    Matrix values(rows, static_cast<int>(names.size()));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < values.cols(); ++j)
            values(i, j) = data[static_cast<std::size_t>(i) * names.size() +
                                static_cast<std::size_t>(j)];
    return TimeSeriesPanel(std::move(values), std::move(names));
}

TimeSeriesPanel read_csv_panel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "' for reading");
    return read_csv_panel(in);
}

void write_csv_panel(std::ostream& out, const TimeSeriesPanel& panel) {
    for (int j = 0; j < panel.num_vars(); ++j)
        out << (j ? "," : "") << panel.var_names()[static_cast<std::size_t>(j)];
    out << "\n";
    char buf[64];
    for (int i = 0; i < panel.num_steps(); ++i) {
        for (int j = 0; j < panel.num_vars(); ++j) {
            // %.17g round-trips a double exactly through the reader.
            std::snprintf(buf, sizeof(buf), "%.17g", panel.values()(i, j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    }
}

void write_csv_panel(const std::string& path, const TimeSeriesPanel& panel) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    write_csv_panel(out, panel);
    if (!out) throw DataError("failed writing '" + path + "'");
}

} // namespace gcte
