#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gcte {

// Scale knobs for the validation sweep. Defaults reproduce the full
// acceptance configuration; the CLI exposes trials/seed/threads.
// dof_override is a deliberately hidden hook: setting it nonzero makes the
// null-calibration criterion test against the wrong degrees of freedom,
// which must make that criterion fail (negative control for the harness).
struct ValidationConfig {
    std::uint64_t seed = 20260819;
    int threads = 1;
    int null_trials = 1000;
    int equivalence_models = 500;
    int formula_designs = 200;
    int blockdet_instances = 200;
    int oracle_trials = 100;
    long oracle_bruteforce_steps = 10000000;
    int entropy_gaussians = 10;
    long entropy_samples = 10000000;
    int dof_override = 0;
};

struct CriterionResult {
    int index = 0;
    std::string name;
    bool passed = false;
    std::string details; // measured statistics backing the verdict
};

// Runs the eight acceptance criteria in order and returns one result per
// criterion. Never throws for a statistical failure (that is a failed
// criterion); only genuine usage errors propagate.
std::vector<CriterionResult> run_validation(const ValidationConfig& cfg);

} // namespace gcte
