#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gcte/causality.hpp"
#include "gcte/linalg.hpp"
#include "gcte/series.hpp"

namespace gcte {

// Spectral radius of the companion matrix of the given coefficient blocks,
// by power iteration to relative tolerance 1e-10. Handles complex-conjugate
// dominant pairs by fitting a quadratic recurrence to successive iterates.
// Never throws on valid square blocks; the caller compares against 1.
double stationarity_check(const std::vector<Matrix>& coeff_blocks);

// Stationary vector autoregression x_t = sum_j A_j x_{t-j} + eps_t with
// Gaussian innovations. Construction rejects non-stationary coefficient
// sets (companion spectral radius >= 1) with a ModelError naming the
// radius.
class VarModel {
public:
    VarModel(std::vector<Matrix> coeff_blocks, SpdMatrix noise_cov,
             std::vector<std::string> var_names = {});

    int dim() const { return static_cast<int>(noise_cov_.dim()); }
    int order() const { return static_cast<int>(coeff_blocks_.size()); }
    const std::vector<Matrix>& coeff_blocks() const { return coeff_blocks_; }
    const SpdMatrix& noise_cov() const { return noise_cov_; }
    const std::vector<std::string>& var_names() const { return var_names_; }
    double spectral_radius() const { return spectral_radius_; }

    // ceil(10 / (1 - spectral radius)): ties the discarded transient to the
    // model's actual mixing rate.
    int default_burn_in() const;

private:
    std::vector<Matrix> coeff_blocks_;
    SpdMatrix noise_cov_;
    std::vector<std::string> var_names_;
    double spectral_radius_ = 0.0;
};

// Generate num_steps observations after discarding burn_in steps from a
// zero history. burn_in < 0 selects the model default. Every innovation is
// a pure function of (seed, stream, time step, component), so output is
// bit-identical across runs and thread counts.
TimeSeriesPanel simulate(const VarModel& model, int num_steps, std::uint64_t seed,
                         int burn_in = -1, std::uint64_t stream = 0);

// Autocovariances Gamma_0 .. Gamma_max_lag of the stationary process, with
// Gamma_j = Cov(x_t, x_{t-j}). Gamma_0 comes from the companion-form
// discrete Lyapunov equation solved by fixed-point iteration
// S <- C S C^T + Q until max|dS| <= 1e-14 (ConvergenceError after 1e6
// iterations); higher lags follow the VAR recursion.
std::vector<Matrix> stationary_autocov(const VarModel& model, int max_lag);

// Population Granger causality for a query against this model: assembles
// the exact joint covariance of (target, lagged blocks) from the
// stationary autocovariances and runs the same partial-covariance logdet
// path as the sample estimator. This is the estimator's population target.
double analytic_granger(const VarModel& model, const CausalityQuery& query);

// Population transfer entropy from the identical covariance path; exactly
// half of analytic_granger.
double analytic_transfer_entropy(const VarModel& model, const CausalityQuery& query);

// Full population path result (residual covariance blocks included), for
// callers that need more than the scalar measures.
CovPathResult analytic_causality(const VarModel& model, const CausalityQuery& query);

// Plain-text model description: dimension, order, coefficient blocks in
// row-major order, noise covariance, simulation seed, variable names.
// Values are written with enough digits to round-trip losslessly.
struct ModelFile {
    VarModel model;
    std::uint64_t seed = 0;
};
ModelFile parse_model_file(std::istream& in);
ModelFile read_model_file(const std::string& path);
void write_model_file(std::ostream& out, const VarModel& model, std::uint64_t seed);
void write_model_file(const std::string& path, const VarModel& model,
                      std::uint64_t seed);

} // namespace gcte
