#pragma once

#include "monofbsde/config.hpp"
#include "monofbsde/operator.hpp"
#include "monofbsde/problems.hpp"
#include "monofbsde/regression.hpp"
#include "monofbsde/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace monofbsde {

/// Refusal to start a run whose memory estimate exceeds the configured budget.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Process exit codes of the command line tool.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_diverged = 2, exit_config = 3, exit_resource = 4 };

/// Everything one experiment needs. See README.md for the config file keys.
struct ExperimentConfig {
    std::string problem = "benchmark";
    BenchmarkParams benchmark;
    LqMfgcParams lq;
    double terminal_slope = 1.0;  // hjb_quadratic: g(x) = terminal_slope * x

    std::size_t n_steps = 100;
    std::size_t n_paths = 10000;

    std::size_t n_common = 0;
    double sigma0 = 0.0;
    std::string common_drift = "zero";  // zero | linear
    double drift_rate = 1.0;
    double p0 = 0.0;
    double memory_budget_mb = 2048.0;

    RegressionBasis basis;
    SolverConfig solver;
    std::uint64_t seed = 42;
    std::filesystem::path output = "output";
    std::size_t burn_in = 30;

    /// Reads and checks every key; unknown keys and unknown names raise ConfigError.
    static ExperimentConfig from(const KeyValueConfig& kv);
    TimeGrid time_grid() const { return TimeGrid(benchmark.horizon, n_steps); }
};

/// Problem names accepted by `custom`: benchmark, hjb_quadratic, lq_mfgc.
std::vector<std::string> problem_names();

/// Builds the operator context for config.problem without common noise.
OperatorContext build_context(const ExperimentConfig& config);

/// Oracle parameters when the configured problem has the closed-form solution.
std::optional<BenchmarkParams> oracle_for(const ExperimentConfig& config);

struct ArtifactSet {
    std::filesystem::path directory;
    std::vector<std::string> files;
    RunReport report;
    std::optional<SlopeFit> fit;
    double final_residual = 0.0;
    std::optional<double> max_eta_error;
    std::optional<double> max_theta_error;
};

/// The benchmark end to end: solve, then write error_log.csv, linear_regression.csv,
/// observed_eta.csv, observed_theta.csv, true_eta.csv and true_theta.csv.
ArtifactSet run_benchmark(const ExperimentConfig& config);

/// Same pipeline for any registered problem; oracle files only when one exists.
ArtifactSet run_custom(const ExperimentConfig& config);

struct CommonNoiseArtifacts {
    ArtifactSet artifacts;
    /// per_path_residuals[n][k]: ||v(alpha_n)||_T restricted to common path k.
    std::vector<std::vector<double>> per_path_residuals;
    /// Residual series of the plain pipeline on the same idiosyncratic bank (degenerate setting).
    std::vector<double> plain_residuals;
    std::optional<double> max_equivalence_gap;
};

/// Approximate bytes held by one common-noise evaluation.
double common_noise_memory_estimate(const ExperimentConfig& config);

/// Common-noise run. problem = benchmark runs the p-blind benchmark and, when sigma0 = 0 and
/// the drift is zero, also the plain pipeline for comparison (equivalence.csv);
/// problem = shifted_benchmark is the additive common noise benchmark in shifted variables.
CommonNoiseArtifacts run_common_noise_demo(const ExperimentConfig& config);

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

enum class InjectedFault { none, theta_printed_limit, tampered_seed };

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_passed() const;
};

/// Fast invariant suite: norms, noise determinism, regression identities, the extragradient
/// inequality, oracle residuals and solver determinism.
ValidationReport validate_install(InjectedFault fault = InjectedFault::none);

}  // namespace monofbsde
