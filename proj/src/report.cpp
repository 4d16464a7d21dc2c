#include "gcte/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "gcte/version.hpp"

namespace gcte {

namespace {

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_names(const std::vector<std::string>& names) {
    if (names.empty()) return "(none)";
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ",";
        out += names[i];
    }
    return out;
}

std::vector<std::string> split_names(const std::string& value) {
    if (value == "(none)") return {};
    std::vector<std::string> names;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = value.find(',', start);
        if (comma == std::string::npos) {
            names.push_back(value.substr(start));
            break;
        }
        names.push_back(value.substr(start, comma - start));
        start = comma + 1;
    }
    return names;
}

// Reads "key rest-of-line" and enforces the expected key, so the schema
// stays an explicit, ordered contract.
class LineReader {
public:
    explicit LineReader(const std::string& text) : in_(text) {}

    std::string expect(const std::string& key) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            const std::size_t space = line.find(' ');
            const std::string found =
                space == std::string::npos ? line : line.substr(0, space);
            if (found != key)
                throw DataError("report line " + std::to_string(line_no_) +
                                ": expected key '" + key + "', found '" + found + "'");
            return space == std::string::npos ? "" : line.substr(space + 1);
        }
        throw DataError("report: unexpected end of input, expected key '" + key + "'");
    }

private:
    std::istringstream in_;
    int line_no_ = 0;
};

double parse_real(const std::string& value, const std::string& key) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + value.size() || value.empty())
        throw DataError("report: cannot parse '" + value + "' as a real for " + key);
    return v;
}

long parse_int(const std::string& value, const std::string& key) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end != begin + value.size() || value.empty())
        throw DataError("report: cannot parse '" + value + "' as an integer for " + key);
    return v;
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end != begin + value.size() || value.empty())
        throw DataError("report: cannot parse '" + value + "' as an integer for " + key);
    return v;
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw DataError("report: expected true/false for " + key + ", found '" + value + "'");
}

} // namespace

std::string AnalysisReport::to_text() const {
    std::ostringstream out;
    out << "gcte_analysis_report 1\n";
    out << "tool_version " << tool_version << "\n";
    out << "predictee " << join_names(predictee) << "\n";
    out << "predictor " << join_names(predictor) << "\n";
    out << "conditioning " << join_names(conditioning) << "\n";
    out << "lag_p " << lag_p << "\n";
    out << "lag_q " << lag_q << "\n";
    out << "lag_r " << lag_r << "\n";
    out << "num_obs " << num_obs << "\n";
    out << "effective_obs " << effective_obs << "\n";
    out << "jitter " << format_real(jitter) << "\n";
    out << "granger_f " << format_real(granger_f) << "\n";
    out << "transfer_entropy " << format_real(transfer_entropy) << "\n";
    out << "equivalence_gap " << format_real(equivalence_gap) << "\n";
    out << "equivalence_ok " << (equivalence_ok ? "true" : "false") << "\n";
    out << "restricted_logdet " << format_real(restricted_logdet) << "\n";
    out << "full_logdet " << format_real(full_logdet) << "\n";
    out << "dof " << dof << "\n";
    out << "test_method " << test_method << "\n";
    out << "statistic " << format_real(statistic) << "\n";
    out << "p_value " << format_real(p_value) << "\n";
    out << "alpha " << format_real(alpha) << "\n";
    out << "rejected " << (rejected ? "true" : "false") << "\n";
    out << "permutations " << permutations << "\n";
    out << "seed " << seed << "\n";
    out << "regressor_min_pivot " << format_real(regressor_min_pivot) << "\n";
    out << "residual_min_pivot " << format_real(residual_min_pivot) << "\n";
    out << "end\n";
    return out.str();
}

AnalysisReport AnalysisReport::from_text(const std::string& text) {
    LineReader reader(text);
    const std::string version = reader.expect("gcte_analysis_report");
    if (version != "1")
        throw DataError("report: unsupported format version '" + version + "'");

    AnalysisReport r;
    r.tool_version = reader.expect("tool_version");
    r.predictee = split_names(reader.expect("predictee"));
    r.predictor = split_names(reader.expect("predictor"));
    r.conditioning = split_names(reader.expect("conditioning"));
    r.lag_p = static_cast<int>(parse_int(reader.expect("lag_p"), "lag_p"));
    r.lag_q = static_cast<int>(parse_int(reader.expect("lag_q"), "lag_q"));
    r.lag_r = static_cast<int>(parse_int(reader.expect("lag_r"), "lag_r"));
    r.num_obs = static_cast<int>(parse_int(reader.expect("num_obs"), "num_obs"));
    r.effective_obs =
        static_cast<int>(parse_int(reader.expect("effective_obs"), "effective_obs"));
    r.jitter = parse_real(reader.expect("jitter"), "jitter");
    r.granger_f = parse_real(reader.expect("granger_f"), "granger_f");
    r.transfer_entropy =
        parse_real(reader.expect("transfer_entropy"), "transfer_entropy");
    r.equivalence_gap =
        parse_real(reader.expect("equivalence_gap"), "equivalence_gap");
    r.equivalence_ok = parse_bool(reader.expect("equivalence_ok"), "equivalence_ok");
    r.restricted_logdet =
        parse_real(reader.expect("restricted_logdet"), "restricted_logdet");
    r.full_logdet = parse_real(reader.expect("full_logdet"), "full_logdet");
    r.dof = static_cast<int>(parse_int(reader.expect("dof"), "dof"));
    r.test_method = reader.expect("test_method");
    if (r.test_method != "chi2" && r.test_method != "perm")
        throw DataError("report: unknown test method '" + r.test_method + "'");
    r.statistic = parse_real(reader.expect("statistic"), "statistic");
    r.p_value = parse_real(reader.expect("p_value"), "p_value");
    r.alpha = parse_real(reader.expect("alpha"), "alpha");
    r.rejected = parse_bool(reader.expect("rejected"), "rejected");
    r.permutations =
        static_cast<int>(parse_int(reader.expect("permutations"), "permutations"));
    r.seed = parse_u64(reader.expect("seed"), "seed");
    r.regressor_min_pivot =
        parse_real(reader.expect("regressor_min_pivot"), "regressor_min_pivot");
    r.residual_min_pivot =
        parse_real(reader.expect("residual_min_pivot"), "residual_min_pivot");
    reader.expect("end");
    return r;
}

AnalysisReport make_report(const CausalityQuery& query, const TimeSeriesPanel& panel,
                           const CausalityResult& result,
                           const SignificanceResult& significance, double alpha,
                           std::uint64_t seed) {
    AnalysisReport r;
    r.tool_version = kToolVersion;
    auto names_of = [&](const std::vector<int>& cols) {
        std::vector<std::string> names;
        names.reserve(cols.size());
        for (int c : cols) names.push_back(panel.var_names()[static_cast<std::size_t>(c)]);
        return names;
    };
    r.predictee = names_of(query.predictee_cols);
    r.predictor = names_of(query.predictor_cols);
    r.conditioning = names_of(query.conditioning_cols);
    r.lag_p = query.lags.p;
    r.lag_q = query.lags.q;
    r.lag_r = query.lags.r;
    r.num_obs = result.num_obs;
    r.effective_obs = result.effective_obs;
    r.jitter = result.jitter;
    r.granger_f = result.granger_f;
    r.transfer_entropy = result.transfer_entropy;
    r.equivalence_gap = result.equivalence_gap;
    r.equivalence_ok = result.equivalence_gap <= kMeasureClampTol;
    r.restricted_logdet = result.restricted_logdet;
    r.full_logdet = result.full_logdet;
    r.dof = significance.dof;
    r.test_method =
        significance.method == TestMethod::permutation ? "perm" : "chi2";
    r.statistic = significance.statistic;
    r.p_value = significance.p_value;
    r.alpha = alpha;
    r.rejected = significance.p_value < alpha;
    r.permutations = significance.num_permutations;
    r.seed = seed;
    r.regressor_min_pivot = result.regressor_min_pivot;
    r.residual_min_pivot = result.residual_min_pivot;
    return r;
}

} // namespace gcte
