#include "monofbsde/errors.hpp"
#include "monofbsde/harness.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <iostream>
#include <optional>

using namespace monofbsde;

namespace {

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<long long> seed;
    std::optional<long long> iterations;
    std::optional<std::string> output;
    std::optional<std::string> problem;
};

void add_common_flags(CLI::App* cmd, Options& opts) {
    cmd->add_option("-c,--config", opts.config_path, "Config file (sectioned key = value text)");
    cmd->add_option("-s,--set", opts.overrides, "Override a key, e.g. --set solver.step=0.05")->take_all();
    cmd->add_option("--seed", opts.seed, "Shortcut for run.seed");
    cmd->add_option("--iterations", opts.iterations, "Shortcut for solver.iterations");
    cmd->add_option("-o,--output", opts.output, "Shortcut for run.output");
    cmd->add_option("--problem", opts.problem, "Shortcut for problem.name");
}

ExperimentConfig load_config(const Options& opts, const std::map<std::string, std::string>& defaults) {
    KeyValueConfig kv = opts.config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(opts.config_path);
    for (const auto& [key, value] : defaults) {
        if (!kv.has(key)) kv.set(key, value);
    }
    for (const auto& o : opts.overrides) kv.apply_override(o);
    if (opts.seed) kv.set("run.seed", std::to_string(*opts.seed));
    if (opts.iterations) kv.set("solver.iterations", std::to_string(*opts.iterations));
    if (opts.output) kv.set("run.output", *opts.output);
    if (opts.problem) kv.set("problem.name", *opts.problem);
    return ExperimentConfig::from(kv);
}

void apply_thread_setting() {
    const char* value = std::getenv("MONOFBSDE_THREADS");
    if (!value) return;
    char* end = nullptr;
    const long n = std::strtol(value, &end, 10);
    if (end == value || *end != '\0' || n < 1) throw ConfigError(std::string("MONOFBSDE_THREADS must be a positive integer: ") + value);
    Eigen::setNbThreads(static_cast<int>(n));
}

int summarize(const ArtifactSet& set) {
    const RunReport& r = set.report;
    std::cout << "iterations: " << r.iterations << "\n"
              << "stop reason: " << to_string(r.stop_reason) << "\n"
              << "initial residual: " << r.residuals.front() << "\n"
              << "final residual: " << set.final_residual << "\n";
    if (set.fit) std::cout << "slope: " << set.fit->slope << " (r^2 " << set.fit->r_squared << ")\n";
    if (set.max_eta_error) std::cout << "max |eta_hat - eta|: " << *set.max_eta_error << "\n";
    if (set.max_theta_error) std::cout << "max |theta_hat - theta|: " << *set.max_theta_error << "\n";
    std::cout << "wrote";
    for (const auto& f : set.files) std::cout << " " << (set.directory / f).string();
    std::cout << "\n";
    if (r.stop_reason == StopReason::diverged) {
        std::cerr << "diverged: " << r.diagnosis << "\n";
        return exit_diverged;
    }
    return exit_ok;
}

InjectedFault parse_fault(const std::string& name) {
    if (name == "none") return InjectedFault::none;
    if (name == "theta_printed_limit") return InjectedFault::theta_printed_limit;
    if (name == "tampered_seed") return InjectedFault::tampered_seed;
    throw ConfigError("unknown fault '" + name + "' (none, theta_printed_limit, tampered_seed)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monotone solver for mean-field FBSDEs"};
    app.require_subcommand(1);
    Options opts;

    auto* benchmark = app.add_subcommand("benchmark", "Run the atan benchmark and write its CSV artifacts");
    add_common_flags(benchmark, opts);
    auto* custom = app.add_subcommand("custom", "Run a registered problem (benchmark, hjb_quadratic, lq_mfgc)");
    add_common_flags(custom, opts);
    auto* common = app.add_subcommand("common-noise", "Run the common-noise pipeline");
    add_common_flags(common, opts);
    auto* validate = app.add_subcommand("validate", "Run the fast invariant suite");
    std::string fault = "none";
    validate->add_option("--inject", fault, "Fault to inject: none, theta_printed_limit, tampered_seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        apply_thread_setting();
        if (validate->parsed()) {
            const ValidationReport report = validate_install(parse_fault(fault));
            for (const auto& c : report.checks) {
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
            }
            return report.all_passed() ? exit_ok : exit_failure;
        }
        if (benchmark->parsed()) return summarize(run_benchmark(load_config(opts, {})));
        if (custom->parsed()) return summarize(run_custom(load_config(opts, {})));
        const auto result = run_common_noise_demo(load_config(opts, {{"common.paths", "16"}}));
        if (result.max_equivalence_gap) {
            std::cout << "max |residual difference| against the plain pipeline: " << *result.max_equivalence_gap << "\n";
        }
        return summarize(result.artifacts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ResourceError& e) {
        std::cerr << e.what() << "\n";
        return exit_resource;
    } catch (const NumericalError& e) {
        std::cerr << "diverged: " << e.what() << "\n";
        return exit_diverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
}
