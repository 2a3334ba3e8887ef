#include "monofbsde/harness.hpp"

#include "monofbsde/csv.hpp"
#include "monofbsde/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace monofbsde {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "problem.name",       "problem.a",          "problem.b",           "problem.c",
        "problem.sigma",      "problem.x0",         "problem.horizon",     "problem.f",
        "problem.terminal_slope",
        "lq.state_weight",    "lq.mean_weight",     "lq.terminal_slope",   "lq.terminal_offset",
        "grid.steps",         "grid.paths",
        "common.paths",       "common.sigma0",      "common.drift",        "common.drift_rate",
        "common.p0",          "common.memory_budget_mb",
        "basis.functions",    "basis.max_total_degree", "basis.max_features",
        "solver.mode",        "solver.step",        "solver.decay",        "solver.tolerance",
        "solver.iterations",  "solver.stop_on",     "solver.averaged_every", "solver.divergence_factor",
        "run.seed",           "run.output",         "run.burn_in",
    };
    return keys;
}

const std::vector<std::string> custom_problems = {"benchmark", "hjb_quadratic", "lq_mfgc"};
const std::vector<std::string> common_problems = {"benchmark", "shifted_benchmark"};

template <class T>
T require_nonnegative(const KeyValueConfig& kv, const std::string& key, T fallback) {
    const long long value = kv.get_int(key, static_cast<long long>(fallback));
    if (value < 0) throw ConfigError("config key '" + key + "' must be nonnegative");
    return static_cast<T>(value);
}

bool contains(const std::vector<std::string>& names, const std::string& name) {
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::string joined(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
    return out;
}

NoiseBank plain_bank(const ExperimentConfig& config) {
    return generate_noise_bank(config.seed, config.n_paths, config.time_grid(), InitialLaw::dirac(config.benchmark.x0));
}

ControlGrid stopping_control(const ExperimentConfig& config, const RunReport& report) {
    return config.solver.stop_on == StopControl::averaged ? report.averaged : report.last;
}

void write_error_logs(ArtifactSet& set, const RunReport& report) {
    CsvTable log{{"iteration", "ln_error"}, {}};
    for (std::size_t n = 0; n < report.residuals.size(); ++n) {
        log.rows.push_back({static_cast<double>(n), std::log(report.residuals[n])});
    }
    write_csv(set.directory / "error_log.csv", log);
    set.files.push_back("error_log.csv");

    if (!report.averaged_residuals.empty()) {
        CsvTable averaged{{"iteration", "ln_error"}, {}};
        for (const auto& [n, value] : report.averaged_residuals) {
            averaged.rows.push_back({static_cast<double>(n), std::log(value)});
        }
        write_csv(set.directory / "averaged_error_log.csv", averaged);
        set.files.push_back("averaged_error_log.csv");
    }
}

void write_fit(ArtifactSet& set, const RunReport& report, std::size_t burn_in) {
    try {
        set.fit = fit_log_error_slope(report, burn_in);
    } catch (const std::invalid_argument&) {
        return;  // too few iterations for a fit
    }
    CsvTable line{{"iteration", "ln_error"}, {}};
    for (std::size_t n = burn_in; n < report.residuals.size(); ++n) {
        line.rows.push_back({static_cast<double>(n), set.fit->intercept + set.fit->slope * static_cast<double>(n)});
    }
    write_csv(set.directory / "linear_regression.csv", line);
    set.files.push_back("linear_regression.csv");
}

void write_series(ArtifactSet& set, const std::string& file, const TimeGrid& grid, const Vector& values) {
    CsvTable table{{"t", "value"}, {}};
    for (std::size_t j = 1; j <= grid.n_steps(); ++j) {
        table.rows.push_back({grid.time(j), values(static_cast<Eigen::Index>(j))});
    }
    write_csv(set.directory / file, table);
    set.files.push_back(file);
}

void write_feedback(ArtifactSet& set, const ExperimentConfig& config, const OperatorContext& ctx,
                    const ControlGrid& control) {
    if (ctx.terms().dim != 1) return;
    const TimeGrid grid = ctx.grid();
    const Evaluation final_eval = evaluate(ctx, control);
    const FeedbackEstimate observed = extract_feedback(final_eval.paths, final_eval.backward);
    write_series(set, "observed_eta.csv", grid, observed.slope);
    write_series(set, "observed_theta.csv", grid, observed.intercept);

    const auto params = oracle_for(config);
    if (!params) return;
    const BenchmarkOracle oracle(*params);
    Vector eta_true(static_cast<Eigen::Index>(grid.n_steps() + 1));
    Vector theta_true(eta_true.size());
    double eta_err = 0.0, theta_err = 0.0;
    for (std::size_t j = 0; j <= grid.n_steps(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        eta_true(jj) = oracle.eta(grid.time(j));
        theta_true(jj) = oracle.theta(grid.time(j));
        if (j >= 1) {
            eta_err = std::max(eta_err, std::abs(observed.slope(jj) - eta_true(jj)));
            theta_err = std::max(theta_err, std::abs(observed.intercept(jj) - theta_true(jj)));
        }
    }
    write_series(set, "true_eta.csv", grid, eta_true);
    write_series(set, "true_theta.csv", grid, theta_true);
    set.max_eta_error = eta_err;
    set.max_theta_error = theta_err;
}

void prepare_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw ConfigError("output directory is not writable: " + dir.string());
    }
}

ArtifactSet run_pipeline(const ExperimentConfig& config) {
    ArtifactSet set;
    set.directory = config.output;
    prepare_directory(set.directory);

    const OperatorContext ctx = build_context(config);
    set.report = solve(as_operator(ctx), ctx.grid(), ctx.zero_control(), config.solver);
    set.final_residual = set.report.residuals.back();
    write_error_logs(set, set.report);
    write_fit(set, set.report, config.burn_in);
    if (set.report.stop_reason != StopReason::diverged) {
        write_feedback(set, config, ctx, stopping_control(config, set.report));
    }
    return set;
}

/// ||v||_T restricted to common path k.
double path_norm(const ControlGrid& v, const TimeGrid& grid, std::size_t k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < v.n_paths(); ++i) {
        for (std::size_t j = 0; j < grid.n_steps(); ++j) {
            for (std::size_t c = 0; c < v.dim(); ++c) {
                const double value = v.at(i, j, k, c);
                sum += value * value;
            }
        }
    }
    return std::sqrt(sum * grid.dt() / static_cast<double>(v.n_paths()));
}

}  // namespace

ExperimentConfig ExperimentConfig::from(const KeyValueConfig& kv) {
    for (const auto& [key, value] : kv.values()) {
        if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    ExperimentConfig c;
    c.problem = kv.get_string("problem.name", c.problem);
    auto& b = c.benchmark;
    b.a = kv.get_double("problem.a", b.a);
    b.b = kv.get_double("problem.b", b.b);
    b.c = kv.get_double("problem.c", b.c);
    b.sigma = kv.get_double("problem.sigma", b.sigma);
    b.x0 = kv.get_double("problem.x0", b.x0);
    b.horizon = kv.get_double("problem.horizon", b.horizon);
    b.f_name = kv.get_string("problem.f", b.f_name);
    c.terminal_slope = kv.get_double("problem.terminal_slope", c.terminal_slope);

    c.lq.state_weight = kv.get_double("lq.state_weight", c.lq.state_weight);
    c.lq.mean_weight = kv.get_double("lq.mean_weight", c.lq.mean_weight);
    c.lq.terminal_slope = kv.get_double("lq.terminal_slope", c.lq.terminal_slope);
    c.lq.terminal_offset = kv.get_double("lq.terminal_offset", c.lq.terminal_offset);

    c.n_steps = require_nonnegative<std::size_t>(kv, "grid.steps", c.n_steps);
    c.n_paths = require_nonnegative<std::size_t>(kv, "grid.paths", c.n_paths);

    c.n_common = require_nonnegative<std::size_t>(kv, "common.paths", c.n_common);
    c.sigma0 = kv.get_double("common.sigma0", c.sigma0);
    c.common_drift = kv.get_string("common.drift", c.common_drift);
    c.drift_rate = kv.get_double("common.drift_rate", c.drift_rate);
    c.p0 = kv.get_double("common.p0", c.p0);
    c.memory_budget_mb = kv.get_double("common.memory_budget_mb", c.memory_budget_mb);

    c.basis.n_functions = static_cast<int>(kv.get_int("basis.functions", c.basis.n_functions));
    c.basis.max_total_degree = static_cast<int>(kv.get_int("basis.max_total_degree", c.basis.max_total_degree));
    c.basis.max_features = static_cast<int>(kv.get_int("basis.max_features", c.basis.max_features));

    auto& s = c.solver;
    const std::string mode = kv.get_string("solver.mode", to_string(s.mode));
    if (mode == "constant-extragradient") s.mode = SolverMode::constant_extragradient;
    else if (mode == "dual-extrapolation") s.mode = SolverMode::dual_extrapolation;
    else throw ConfigError("unknown solver.mode '" + mode + "' (constant-extragradient, dual-extrapolation)");
    s.step = kv.get_double("solver.step", s.step);
    s.decay = kv.get_double("solver.decay", s.decay);
    s.tolerance = kv.get_double("solver.tolerance", s.tolerance);
    s.max_iterations = static_cast<int>(require_nonnegative<long long>(kv, "solver.iterations", s.max_iterations));
    const std::string stop_on = kv.get_string("solver.stop_on", "last");
    if (stop_on == "last") s.stop_on = StopControl::last;
    else if (stop_on == "averaged") s.stop_on = StopControl::averaged;
    else throw ConfigError("unknown solver.stop_on '" + stop_on + "' (last, averaged)");
    s.averaged_every = static_cast<int>(require_nonnegative<long long>(kv, "solver.averaged_every", s.averaged_every));
    s.divergence_factor = kv.get_double("solver.divergence_factor", s.divergence_factor);

    c.seed = static_cast<std::uint64_t>(require_nonnegative<long long>(kv, "run.seed", static_cast<long long>(c.seed)));
    c.output = kv.get_string("run.output", c.output.string());
    c.burn_in = require_nonnegative<std::size_t>(kv, "run.burn_in", c.burn_in);

    const auto f_names = scalar_function_names();
    if (!contains(f_names, b.f_name)) {
        throw ConfigError("unknown problem.f '" + b.f_name + "' (" + joined(f_names) + ")");
    }
    if (!contains(custom_problems, c.problem) && !contains(common_problems, c.problem)) {
        throw ConfigError("unknown problem.name '" + c.problem + "'");
    }
    if (c.common_drift != "zero" && c.common_drift != "linear") {
        throw ConfigError("unknown common.drift '" + c.common_drift + "' (zero, linear)");
    }
    if (c.n_steps == 0 || c.n_paths == 0) throw ConfigError("grid.steps and grid.paths must be positive");
    if (!(b.horizon > 0.0)) throw ConfigError("problem.horizon must be positive");
    if (!(b.sigma >= 0.0) || !(c.sigma0 >= 0.0)) throw ConfigError("diffusion coefficients must be nonnegative");
    if (!(c.memory_budget_mb > 0.0)) throw ConfigError("common.memory_budget_mb must be positive");
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

std::vector<std::string> problem_names() { return custom_problems; }

OperatorContext build_context(const ExperimentConfig& config) {
    const TimeGrid grid = config.time_grid();
    const double sigma = config.benchmark.sigma;
    if (config.problem == "benchmark") {
        return make_fbsde_context(benchmark_coefficients(config.benchmark), plain_bank(config), grid, config.basis,
                                  sigma);
    }
    if (config.problem == "hjb_quadratic") {
        const double slope = config.terminal_slope;
        auto coeffs = measure_free_problem(
            "hjb_quadratic", 1, [](const Vector&, const Vector& u) { return u; },
            [](const Vector& x, const Vector&) { return Vector::Zero(x.size()).eval(); },
            [slope](const Vector& x) { return (slope * x).eval(); }, [](const Vector&, const Vector& a) { return a; });
        return make_fbsde_context(coeffs, plain_bank(config), grid, config.basis, sigma);
    }
    if (config.problem == "lq_mfgc") {
        return mfgc_as_fbsde(lq_mfgc(config.lq), plain_bank(config), grid, config.basis, sigma);
    }
    throw ConfigError("problem '" + config.problem + "' is not available here (" + joined(custom_problems) + ")");
}

std::optional<BenchmarkParams> oracle_for(const ExperimentConfig& config) {
    if (config.problem == "benchmark" && config.benchmark.c == 0.0) return config.benchmark;
    if (config.problem == "hjb_quadratic" && config.terminal_slope > 0.0) {
        BenchmarkParams p = config.benchmark;
        p.a = 1.0;
        p.b = config.terminal_slope;
        p.c = 0.0;
        p.f_name = "zero";
        return p;
    }
    return std::nullopt;
}

ArtifactSet run_benchmark(const ExperimentConfig& config) {
    if (config.problem != "benchmark") throw ConfigError("the benchmark command needs problem.name = benchmark");
    return run_pipeline(config);
}

ArtifactSet run_custom(const ExperimentConfig& config) {
    if (!contains(custom_problems, config.problem)) {
        throw ConfigError("unknown custom problem '" + config.problem + "' (" + joined(custom_problems) + ")");
    }
    return run_pipeline(config);
}

double common_noise_memory_estimate(const ExperimentConfig& config) {
    // control, paths, backward values, residual, iterate copies and regression scratch
    constexpr double live_grids = 10.0;
    const double cells = static_cast<double>(config.n_paths) * static_cast<double>(config.n_steps + 1) *
                         static_cast<double>(std::max<std::size_t>(config.n_common, 1));
    return live_grids * cells * sizeof(double);
}

CommonNoiseArtifacts run_common_noise_demo(const ExperimentConfig& config) {
    if (config.n_common == 0) throw ConfigError("common.paths must be positive for a common-noise run");
    if (!contains(common_problems, config.problem)) {
        throw ConfigError("unknown common-noise problem '" + config.problem + "' (" + joined(common_problems) + ")");
    }
    const double estimate = common_noise_memory_estimate(config);
    if (estimate > config.memory_budget_mb * 1024.0 * 1024.0) {
        std::ostringstream msg;
        msg << "refusing common-noise run: estimated " << estimate / (1024.0 * 1024.0) << " MB for N_p = "
            << config.n_paths << ", N_t = " << config.n_steps << ", N_0 = " << config.n_common
            << " exceeds the budget of " << config.memory_budget_mb << " MB";
        throw ResourceError(msg.str());
    }

    CommonNoiseArtifacts out;
    ArtifactSet& set = out.artifacts;
    set.directory = config.output;
    prepare_directory(set.directory);

    const TimeGrid grid = config.time_grid();
    const CommonNoiseSpec spec{config.n_common, InitialLaw::dirac(config.p0)};
    NoiseBank bank =
        generate_noise_bank(config.seed, config.n_paths, grid, InitialLaw::dirac(config.benchmark.x0), spec);

    CommonDynamics dynamics;
    dynamics.sigma0 = config.sigma0;
    if (config.common_drift == "linear") {
        const double rate = config.drift_rate;
        dynamics.drift = [rate](const Vector& p) { return (rate * p).eval(); };
    }
    const ProblemCoefficients coeffs = config.problem == "shifted_benchmark"
                                           ? shifted_benchmark_coefficients(config.benchmark)
                                           : benchmark_coefficients(config.benchmark);
    const OperatorContext ctx(terms_from(coeffs), bank, grid, config.basis, config.benchmark.sigma, dynamics);
    const ResidualOperator v = [&ctx](const ControlGrid& control) { return eval_v_common(ctx, control); };

    SolveOptions options;
    options.on_iterate = [&](int, const ControlGrid&, const ControlGrid& residual) {
        std::vector<double> row(config.n_common);
        for (std::size_t k = 0; k < config.n_common; ++k) row[k] = path_norm(residual, grid, k);
        out.per_path_residuals.push_back(std::move(row));
    };
    set.report = solve(v, grid, ctx.zero_control(), config.solver, options);
    set.final_residual = set.report.residuals.back();
    write_error_logs(set, set.report);
    write_fit(set, set.report, config.burn_in);

    CsvTable per_path{{"iteration"}, {}};
    for (std::size_t k = 0; k < config.n_common; ++k) per_path.header.push_back("ln_error_" + std::to_string(k));
    for (std::size_t n = 0; n < out.per_path_residuals.size(); ++n) {
        std::vector<double> row{static_cast<double>(n)};
        for (double value : out.per_path_residuals[n]) row.push_back(std::log(value));
        per_path.rows.push_back(std::move(row));
    }
    write_csv(set.directory / "per_path_error_log.csv", per_path);
    set.files.push_back("per_path_error_log.csv");

    const bool degenerate = config.problem == "benchmark" && config.sigma0 == 0.0 && config.common_drift == "zero";
    if (degenerate) {
        const OperatorContext plain = make_fbsde_context(benchmark_coefficients(config.benchmark), plain_bank(config),
                                                         grid, config.basis, config.benchmark.sigma);
        const RunReport plain_report = solve(as_operator(plain), grid, plain.zero_control(), config.solver);
        out.plain_residuals = plain_report.residuals;
        CsvTable eq{{"iteration", "error_common", "error_plain", "abs_difference"}, {}};
        double gap = 0.0;
        const std::size_t n_rows = std::max(plain_report.residuals.size(), set.report.residuals.size());
        for (std::size_t n = 0; n < n_rows; ++n) {
            if (n >= plain_report.residuals.size() || n >= set.report.residuals.size()) {
                gap = std::numeric_limits<double>::infinity();
                break;
            }
            const double d = std::abs(set.report.residuals[n] - plain_report.residuals[n]);
            gap = std::max(gap, d);
            eq.rows.push_back({static_cast<double>(n), set.report.residuals[n], plain_report.residuals[n], d});
        }
        out.max_equivalence_gap = gap;
        write_csv(set.directory / "equivalence.csv", eq);
        set.files.push_back("equivalence.csv");
    }
    return out;
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.passed; });
}

}  // namespace monofbsde
