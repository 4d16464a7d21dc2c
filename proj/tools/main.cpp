#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gcte/causality.hpp"
#include "gcte/errors.hpp"
#include "gcte/report.hpp"
#include "gcte/series.hpp"
#include "gcte/stats.hpp"
#include "gcte/validate.hpp"
#include "gcte/var_sim.hpp"
#include "gcte/version.hpp"

namespace {

std::vector<std::string> split_names(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<int> columns_for(const gcte::TimeSeriesPanel& panel,
                             const std::string& names_csv) {
    std::vector<int> cols;
    for (const auto& name : split_names(names_csv))
        cols.push_back(panel.column_of(name));
    return cols;
}

struct SimulateArgs {
    std::string model_path;
    std::string out_path;
    int steps = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int burn_in = -1;
};

int cmd_simulate(const SimulateArgs& args) {
    gcte::ModelFile mf = gcte::read_model_file(args.model_path);
    const std::uint64_t seed = args.seed_given ? args.seed : mf.seed;
    const int burn =
        args.burn_in >= 0 ? args.burn_in : mf.model.default_burn_in();
    gcte::TimeSeriesPanel panel =
        gcte::simulate(mf.model, args.steps, seed, burn);
    gcte::write_csv_panel(args.out_path, panel);
    std::printf("spectral radius %.17g\n", mf.model.spectral_radius());
    std::printf("burn-in %d\n", burn);
    std::printf("wrote %d rows x %d columns to %s (seed %llu)\n",
                panel.num_steps(), panel.num_vars(), args.out_path.c_str(),
                static_cast<unsigned long long>(seed));
    return 0;
}

struct AnalyzeArgs {
    std::string csv_path;
    std::string predictee;
    std::string predictor;
    std::string condition;
    std::string out_path;
    std::string test = "chi2";
    int p = 1;
    int q = 1;
    int r = 0;
    bool r_given = false;
    double alpha = 0.05;
    int permutations = 500;
    std::uint64_t seed = 0;
    double jitter = 0.0;
    int threads = 1;
};

int cmd_analyze(const AnalyzeArgs& args) {
    gcte::TimeSeriesPanel panel = gcte::read_csv_panel(args.csv_path);

    gcte::CausalityQuery query;
    query.predictee_cols = columns_for(panel, args.predictee);
    query.predictor_cols = columns_for(panel, args.predictor);
    query.conditioning_cols = columns_for(panel, args.condition);
    query.lags.p = args.p;
    query.lags.q = args.q;
    // an unstated -r defaults to 1 when a conditioning set is present
    query.lags.r = args.r_given ? args.r
                                : (query.conditioning_cols.empty() ? 0 : 1);

    gcte::CausalityResult result =
        gcte::equivalence_report(query, panel, args.jitter);

    gcte::SignificanceResult significance;
    if (args.test == "perm") {
        significance = gcte::permutation_test(query, panel, args.permutations,
                                              args.seed, args.threads,
                                              args.jitter);
    } else {
        significance.statistic = result.statistic;
        significance.dof = result.dof;
        significance.p_value = result.p_value;
        significance.method = gcte::TestMethod::chi2_asymptotic;
    }

    gcte::AnalysisReport report = gcte::make_report(
        query, panel, result, significance, args.alpha, args.seed);
    const std::string text = report.to_text();
    if (args.out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream out(args.out_path);
        if (!out)
            throw gcte::DataError("cannot open output file " + args.out_path);
        out << text;
    }
    return 0;
}

struct ValidateArgs {
    int trials = 1000;
    std::uint64_t seed = 20260819;
    int threads = 1;
    int override_dof = 0;
};

int cmd_validate(const ValidateArgs& args) {
    gcte::ValidationConfig cfg;
    cfg.null_trials = args.trials;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    cfg.dof_override = args.override_dof;

    const auto results = gcte::run_validation(cfg);
    int passed = 0;
    for (const auto& r : results) {
        std::printf("[%s] %d. %s: %s\n", r.passed ? "PASS" : "FAIL", r.index,
                    r.name.c_str(), r.details.c_str());
        if (r.passed) ++passed;
    }
    std::printf("%d/%d criteria passed\n", passed,
                static_cast<int>(results.size()));
    return passed == static_cast<int>(results.size()) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Granger causality and Gaussian transfer entropy toolkit"};
    app.set_version_flag("--version", std::string(gcte::kToolVersion));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand(
        "simulate", "Generate a CSV panel from a VAR model file");
    simulate->add_option("--model", sim.model_path, "model file path")
        ->required();
    simulate->add_option("--steps", sim.steps, "observations to generate")
        ->required()
        ->check(CLI::PositiveNumber);
    auto* sim_seed = simulate->add_option(
        "--seed", sim.seed, "overrides the seed stored in the model file");
    simulate->add_option("--out", sim.out_path, "output CSV path")->required();
    simulate->add_option("--burn-in", sim.burn_in,
                         "transient steps to discard (default: model heuristic)");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand(
        "analyze", "Estimate conditional Granger causality and transfer "
                   "entropy from a CSV panel");
    analyze->add_option("csv", an.csv_path, "input CSV panel")->required();
    analyze
        ->add_option("--predictee", an.predictee,
                     "comma-separated predictee column names")
        ->required();
    analyze
        ->add_option("--predictor", an.predictor,
                     "comma-separated predictor column names")
        ->required();
    analyze->add_option("--condition", an.condition,
                        "comma-separated conditioning column names");
    analyze->add_option("-p,--lag-p", an.p, "predictee lag order (default 1)");
    analyze->add_option("-q,--lag-q", an.q, "predictor lag order (default 1)");
    auto* r_opt = analyze->add_option(
        "-r,--lag-r", an.r,
        "conditioning lag order (default 1 when --condition is given)");
    analyze
        ->add_option("--test", an.test,
                     "significance test: chi2 (asymptotic) or perm (surrogate)")
        ->check(CLI::IsMember({"chi2", "perm"}));
    analyze->add_option("--alpha", an.alpha, "significance level (default 0.05)")
        ->check(CLI::Range(1e-12, 1.0));
    analyze->add_option("--permutations", an.permutations,
                        "surrogate count for --test perm (default 500)");
    analyze->add_option("--seed", an.seed, "seed for the permutation test");
    analyze->add_option("--jitter", an.jitter,
                        "ridge added to the regressor covariance diagonal")
        ->check(CLI::NonNegativeNumber);
    analyze->add_option("--threads", an.threads, "permutation worker threads")
        ->check(CLI::PositiveNumber);
    analyze->add_option("--out", an.out_path,
                        "report file (default: standard output)");

    ValidateArgs va;
    auto* validate = app.add_subcommand(
        "validate", "Run the acceptance criteria end to end");
    validate->add_option("--trials", va.trials, "null-calibration trials")
        ->check(CLI::Range(100, 1000000));
    validate->add_option("--seed", va.seed, "master seed");
    validate->add_option("--threads", va.threads, "worker threads")
        ->check(CLI::PositiveNumber);
    validate->add_option("--override-dof", va.override_dof)->group("");

    int exit_code = 0;
    simulate->callback([&] {
        sim.seed_given = sim_seed->count() > 0;
        exit_code = cmd_simulate(sim);
    });
    analyze->callback([&] {
        an.r_given = r_opt->count() > 0;
        exit_code = cmd_analyze(an);
    });
    validate->callback([&] { exit_code = cmd_validate(va); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const gcte::ModelError& e) {
        std::fprintf(stderr, "model error: %s\n", e.what());
        return 2;
    } catch (const gcte::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const gcte::InsufficientData& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const gcte::ShapeError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const gcte::QueryError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const gcte::Error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 4;
    }
    return exit_code;
}
