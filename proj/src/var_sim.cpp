#include "gcte/var_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "gcte/rng.hpp"

namespace gcte {

namespace {

void check_blocks(const std::vector<Matrix>& blocks) {
    if (blocks.empty())
        throw ModelError("at least one coefficient block is required");
    const auto n = blocks[0].rows();
    for (const auto& b : blocks) {
        if (b.rows() != n || b.cols() != n)
            throw ShapeError("coefficient blocks must be square with equal dimension");
        if (!b.allFinite())
            throw ModelError("coefficient blocks contain non-finite entries");
    }
}

Matrix companion_matrix(const std::vector<Matrix>& blocks) {
    const int n = static_cast<int>(blocks[0].rows());
    const int k = static_cast<int>(blocks.size());
    Matrix c = Matrix::Zero(n * k, n * k);
    for (int j = 0; j < k; ++j) c.block(0, j * n, n, n) = blocks[static_cast<std::size_t>(j)];
    if (k > 1) c.block(n, 0, n * (k - 1), n * (k - 1)).setIdentity();
    return c;
}

} // namespace

double stationarity_check(const std::vector<Matrix>& coeff_blocks) {
    check_blocks(coeff_blocks);
    const Matrix c = companion_matrix(coeff_blocks);
    const int m = static_cast<int>(c.rows());
    if (c.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    // Power iteration with a two-step quadratic fit so that
    // complex-conjugate (and defective) dominant pairs, which make the
    // plain iteration oscillate, still converge: if w2 ~ -b w1 - c0 v
    // along the dominant subspace, the dominant modulus is the largest
    // root modulus of z^2 + b z + c0.
    const double tol = 1e-10;
    CounterRng rng(0x57a710a5u, 0); // fixed internal stream keeps this pure

    for (int restart = 0; restart < 5; ++restart) {
        Vector v(m);
        for (int i = 0; i < m; ++i)
            v[i] = rng.normal(static_cast<std::uint64_t>(restart) * 1000003u +
                              static_cast<std::uint64_t>(i));
        const double vn = v.norm();
        if (vn == 0.0) continue;
        v /= vn;

        double prev = -1.0;
        int stable = 0;
        bool collapsed = false;
        for (int iter = 0; iter < 100000; ++iter) {
            Vector w1 = c * v;
            const double n1 = w1.norm();
            if (n1 == 0.0) {
                collapsed = true; // v sat inside a nilpotent subspace; retry
                break;
            }
            Vector w2 = c * w1;

            double est = n1; // ||v|| = 1
            double res = (w1 - v.dot(w1) * v).norm() / n1;

            const double g11 = w1.squaredNorm();
            const double g12 = v.dot(w1);
            const double det = g11 - g12 * g12;
            if (det > 1e-12 * g11) {
                // Least squares for [b, c0] in w2 + b w1 + c0 v = 0:
                // [[g11, g12], [g12, 1]] [b, c0]^T = [-w1.w2, -v.w2]
                const double r1 = -w1.dot(w2);
                const double r2 = -v.dot(w2);
                const double b = (r1 - g12 * r2) / det;
                const double c0 = (g11 * r2 - g12 * r1) / det;
                const double w2n = w2.norm();
                if (w2n == 0.0) {
                    est = 0.0;
                    res = 0.0;
                } else {
                    const double fit_res = (w2 + b * w1 + c0 * v).norm() / w2n;
                    if (fit_res < res) {
                        const double disc = b * b - 4.0 * c0;
                        if (disc < 0.0) {
                            est = std::sqrt(c0); // conjugate pair: c0 = |lambda|^2
                        } else {
                            const double sq = std::sqrt(disc);
                            est = std::max(std::abs(0.5 * (-b + sq)),
                                           std::abs(0.5 * (-b - sq)));
                        }
                        res = fit_res;
                    }
                }
            }

            if (std::abs(est - prev) <= tol * std::max(std::abs(est), 1e-30)) {
                if (++stable >= 3) return est;
            } else {
                stable = 0;
            }
            prev = est;
            v = w1 / n1;
        }
        if (!collapsed) return prev; // iteration cap: best available estimate
    }
    return 0.0; // every start collapsed to zero: nilpotent companion
}

VarModel::VarModel(std::vector<Matrix> coeff_blocks, SpdMatrix noise_cov,
                   std::vector<std::string> var_names)
    : coeff_blocks_(std::move(coeff_blocks)),
      noise_cov_(std::move(noise_cov)),
      var_names_(std::move(var_names)) {
    check_blocks(coeff_blocks_);
    const int n = static_cast<int>(coeff_blocks_[0].rows());
    if (noise_cov_.dim() != n)
        throw ShapeError("noise covariance dimension " +
                         std::to_string(noise_cov_.dim()) +
                         " does not match coefficient dimension " + std::to_string(n));
    if (var_names_.empty()) {
        var_names_.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) var_names_.push_back("x" + std::to_string(i + 1));
    } else if (static_cast<int>(var_names_.size()) != n) {
        throw ShapeError("expected " + std::to_string(n) + " variable names, got " +
                         std::to_string(var_names_.size()));
    }
    spectral_radius_ = stationarity_check(coeff_blocks_);
    if (spectral_radius_ >= 1.0)
        throw ModelError("model is not stationary: companion spectral radius " +
                         std::to_string(spectral_radius_) + " is not < 1");
}

int VarModel::default_burn_in() const {
    return static_cast<int>(std::ceil(10.0 / (1.0 - spectral_radius_)));
}

TimeSeriesPanel simulate(const VarModel& model, int num_steps, std::uint64_t seed,
                         int burn_in, std::uint64_t stream) {
    if (num_steps < 1) throw QueryError("simulate: num_steps must be positive");
    if (burn_in < 0) burn_in = model.default_burn_in();
    const int n = model.dim();
    const int k = model.order();
    const auto& blocks = model.coeff_blocks();
    const auto lower = model.noise_cov().chol_lower().triangularView<Eigen::Lower>();
    CounterRng rng(seed, stream);

    Matrix ring = Matrix::Zero(k, n); // last k states, row (t mod k) = x_t
    Matrix out(num_steps, n);
    Vector z(n), x(n);
    const long total = static_cast<long>(burn_in) + num_steps;
    for (long t = 0; t < total; ++t) {
        for (int i = 0; i < n; ++i)
            z[i] = rng.normal(static_cast<std::uint64_t>(t) *
                                  static_cast<std::uint64_t>(n) +
                              static_cast<std::uint64_t>(i));
        x.noalias() = lower * z;
        for (int j = 1; j <= k; ++j) {
            const long tj = t - j;
            if (tj < 0) break; // history before the start is all zero
            x.noalias() += blocks[static_cast<std::size_t>(j - 1)] *
                           ring.row(static_cast<int>(tj % k)).transpose();
        }
        ring.row(static_cast<int>(t % k)) = x.transpose();
        if (t >= burn_in) out.row(static_cast<int>(t - burn_in)) = x.transpose();
    }
    return TimeSeriesPanel(std::move(out), model.var_names());
}

std::vector<Matrix> stationary_autocov(const VarModel& model, int max_lag) {
    if (max_lag < 0) throw QueryError("stationary_autocov: max_lag must be >= 0");
    const int n = model.dim();
    const int k = model.order();
    const Matrix c = companion_matrix(model.coeff_blocks());
    Matrix q = Matrix::Zero(n * k, n * k);
    q.topLeftCorner(n, n) = model.noise_cov().values();

    Matrix s = q;
    const long cap = 1000000;
    for (long it = 0;; ++it) {
        if (it >= cap)
            throw ConvergenceError(
                "stationary covariance fixed point not below 1e-14 after 1e6 "
                "iterations (spectral radius " +
                std::to_string(model.spectral_radius()) + ")");
        Matrix next = c * s * c.transpose() + q;
        const double diff = (next - s).cwiseAbs().maxCoeff();
        s = std::move(next);
        if (diff <= 1e-14) break;
    }
    s = ((s + s.transpose()) * 0.5).eval();

    std::vector<Matrix> gamma;
    gamma.reserve(static_cast<std::size_t>(max_lag) + 1);
    for (int j = 0; j <= std::min(max_lag, k - 1); ++j)
        gamma.push_back(s.block(0, j * n, n, n));
    for (int j = k; j <= max_lag; ++j) {
        Matrix g = Matrix::Zero(n, n);
        for (int i = 1; i <= k; ++i)
            g += model.coeff_blocks()[static_cast<std::size_t>(i - 1)] *
                 gamma[static_cast<std::size_t>(j - i)];
        gamma.push_back(std::move(g));
    }
    return gamma;
}

namespace {

// Cov(v_{t-a, i}, v_{t-b, j}) in terms of Gamma_j = Cov(x_t, x_{t-j}).
double population_cov(const std::vector<Matrix>& gamma, int a, int i, int b, int j) {
    return b >= a ? gamma[static_cast<std::size_t>(b - a)](i, j)
                  : gamma[static_cast<std::size_t>(a - b)](j, i);
}

} // namespace

CovPathResult analytic_causality(const VarModel& model, const CausalityQuery& query) {
    query.validate(model.dim());
    const bool has_z = !query.conditioning_cols.empty() && query.lags.r > 0;
    const int p = query.lags.p;
    const int q = query.lags.q;
    const int r = has_z ? query.lags.r : 0;
    const int dx = static_cast<int>(query.predictee_cols.size());
    const int dy = static_cast<int>(query.predictor_cols.size());
    const int dz = has_z ? static_cast<int>(query.conditioning_cols.size()) : 0;
    const int max_lag = std::max({p, q, r});

    const std::vector<Matrix> gamma = stationary_autocov(model, max_lag);

    // Stacked layout mirrors the sample estimator: target block at lag 0,
    // then predictee lags 1..p, predictor lags 1..q, conditioning lags 1..r.
    std::vector<std::pair<int, int>> entries; // (lag, model variable)
    std::vector<std::string> labels;          // regressor columns only
    entries.reserve(static_cast<std::size_t>(dx + p * dx + q * dy + r * dz));
    for (int i : query.predictee_cols) entries.emplace_back(0, i);
    auto push_block = [&](const std::vector<int>& cols, int lags) {
        for (int a = 1; a <= lags; ++a)
            for (int i : cols) {
                entries.emplace_back(a, i);
                labels.push_back(model.var_names()[static_cast<std::size_t>(i)] +
                                 "[t-" + std::to_string(a) + "]");
            }
    };
    push_block(query.predictee_cols, p);
    push_block(query.predictor_cols, q);
    if (has_z) push_block(query.conditioning_cols, r);

    const int dim = static_cast<int>(entries.size());
    Matrix joint(dim, dim);
    for (int row = 0; row < dim; ++row)
        for (int col = 0; col < dim; ++col)
            joint(row, col) =
                population_cov(gamma, entries[static_cast<std::size_t>(row)].first,
                               entries[static_cast<std::size_t>(row)].second,
                               entries[static_cast<std::size_t>(col)].first,
                               entries[static_cast<std::size_t>(col)].second);

    return causality_from_joint(joint, dx, p * dx, q * dy, r * dz, 0.0, labels);
}

double analytic_granger(const VarModel& model, const CausalityQuery& query) {
    return analytic_causality(model, query).granger_f;
}

double analytic_transfer_entropy(const VarModel& model, const CausalityQuery& query) {
    return analytic_causality(model, query).transfer_entropy;
}

namespace {

std::string expect_token(std::istream& in, const char* context) {
    std::string tok;
    if (!(in >> tok))
        throw ModelError(std::string("model file: unexpected end of input, expected ") +
                         context);
    return tok;
}

void expect_keyword(std::istream& in, const std::string& keyword) {
    const std::string tok = expect_token(in, keyword.c_str());
    if (tok != keyword)
        throw ModelError("model file: expected '" + keyword + "', found '" + tok + "'");
}

double read_value(std::istream& in, const char* context) {
    double v;
    if (!(in >> v))
        throw ModelError(std::string("model file: cannot read number for ") + context);
    return v;
}

Matrix read_matrix(std::istream& in, int rows, int cols, const char* context) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = read_value(in, context);
    return m;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    char buf[64];
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << (j ? " " : "") << buf;
        }
        out << "\n";
    }
}

} // namespace

ModelFile parse_model_file(std::istream& in) {
    expect_keyword(in, "gcte_var_model");
    const std::string version = expect_token(in, "format version");
    if (version != "1")
        throw ModelError("model file: unsupported format version '" + version + "'");

    expect_keyword(in, "dim");
    long dim = 0;
    if (!(in >> dim) || dim < 1)
        throw ModelError("model file: invalid dimension");
    expect_keyword(in, "order");
    long order = 0;
    if (!(in >> order) || order < 1)
        throw ModelError("model file: invalid order");
    expect_keyword(in, "seed");
    std::uint64_t seed = 0;
    if (!(in >> seed)) throw ModelError("model file: invalid seed");

    expect_keyword(in, "names");
    std::vector<std::string> names;
    for (long i = 0; i < dim; ++i)
        names.push_back(expect_token(in, "variable name"));

    std::vector<Matrix> blocks;
    for (long j = 1; j <= order; ++j) {
        expect_keyword(in, "coeff_block");
        long index = 0;
        if (!(in >> index) || index != j)
            throw ModelError("model file: coefficient blocks must appear as 1.." +
                             std::to_string(order) + " in order");
        blocks.push_back(read_matrix(in, static_cast<int>(dim), static_cast<int>(dim),
                                     "coefficient block"));
    }

    expect_keyword(in, "noise_cov");
    Matrix noise = read_matrix(in, static_cast<int>(dim), static_cast<int>(dim),
                               "noise covariance");
    expect_keyword(in, "end");
    std::string trailing;
    if (in >> trailing)
        throw ModelError("model file: unexpected trailing content '" + trailing + "'");

    try {
        return ModelFile{VarModel(std::move(blocks), SpdMatrix(std::move(noise)),
                                  std::move(names)),
                         seed};
    } catch (const ModelError&) {
        throw; // already carries the right context (e.g. the spectral radius)
    } catch (const Error& e) {
        throw ModelError(std::string("model file: invalid model: ") + e.what());
    }
}

ModelFile read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    return parse_model_file(in);
}

void write_model_file(std::ostream& out, const VarModel& model, std::uint64_t seed) {
    for (const auto& name : model.var_names())
        if (name.find_first_of(" \t\n\r") != std::string::npos)
            throw ModelError("variable name '" + name +
                             "' contains whitespace and cannot be serialized");
    out << "gcte_var_model 1\n";
    out << "dim " << model.dim() << "\n";
    out << "order " << model.order() << "\n";
    out << "seed " << seed << "\n";
    out << "names";
    for (const auto& name : model.var_names()) out << " " << name;
    out << "\n";
    for (int j = 0; j < model.order(); ++j) {
        out << "coeff_block " << j + 1 << "\n";
        write_matrix(out, model.coeff_blocks()[static_cast<std::size_t>(j)]);
    }
    out << "noise_cov\n";
    write_matrix(out, model.noise_cov().values());
    out << "end\n";
}

void write_model_file(const std::string& path, const VarModel& model,
                      std::uint64_t seed) {
    std::ofstream out(path);
    if (!out) throw ModelError("cannot open '" + path + "' for writing");
    write_model_file(out, model, seed);
    if (!out) throw ModelError("failed writing '" + path + "'");
}

} // namespace gcte
