#include "monofbsde/csv.hpp"
#include "monofbsde/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace monofbsde;
namespace fs = std::filesystem;

namespace {

KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    return KeyValueConfig::parse(in);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_config(const std::string& output) {
    ExperimentConfig c;
    c.n_paths = 400;
    c.n_steps = 20;
    c.solver.max_iterations = 50;
    c.burn_in = 10;
    c.output = fs::path("harness_out") / output;
    return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config grammar") {
    const auto kv = parse(R"(# leading comment
top = 1
[solver]
step = 0.05   # trailing comment
tolerance = inf

[grid]
paths=200
paths = 300
)");
    CHECK(kv.get_int("top", 0) == 1);
    CHECK(kv.get_double("solver.step", 0.0) == 0.05);
    CHECK(std::isinf(kv.get_double("solver.tolerance", 0.0)));
    CHECK(kv.get_int("grid.paths", 0) == 300);
    CHECK(kv.get_string("missing", "x") == "x");
    CHECK_THROWS_AS(parse("[broken\n"), ConfigError);
    CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(parse("a = b\n").get_double("a", 0.0), ConfigError);
    CHECK_THROWS_AS(parse("a = 1.5\n").get_int("a", 0), ConfigError);
    CHECK(parse("a = 1, 2.5 ,inf\n").get_doubles("a", {}).size() == 3);
}

TEST_CASE("overrides take precedence") {
    auto kv = parse("[solver]\nstep = 0.05\n");
    kv.apply_override("solver.step=0.2");
    kv.apply_override("run.seed = 9");
    CHECK(kv.get_double("solver.step", 0.0) == 0.2);
    CHECK(kv.get_int("run.seed", 0) == 9);
    CHECK_THROWS_AS(kv.apply_override("nothing"), ConfigError);
}

TEST_CASE("experiment config from text") {
    const auto c = ExperimentConfig::from(parse(R"(
[problem]
name = benchmark
f = tanh
sigma = 0.5
[grid]
steps = 30
paths = 1000
[solver]
mode = dual-extrapolation
decay = 0.5
stop_on = averaged
averaged_every = 5
[run]
seed = 7
output = somewhere
)"));
    CHECK(c.benchmark.f_name == "tanh");
    CHECK(c.benchmark.sigma == 0.5);
    CHECK(c.n_steps == 30);
    CHECK(c.solver.mode == SolverMode::dual_extrapolation);
    CHECK(c.solver.stop_on == StopControl::averaged);
    CHECK(c.seed == 7);
    CHECK(c.output == fs::path("somewhere"));
}

TEST_CASE("experiment config rejects unknown names") {
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[solver]\nstepp = 1\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[problem]\nname = nope\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[problem]\nf = nope\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[solver]\nmode = newton\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[solver]\ndecay = 0.5\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[grid]\npaths = -4\n")), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from(parse("[common]\ndrift = cubic\n")), ConfigError);
}

TEST_CASE("benchmark artifacts round trip and are byte-identical across runs") {
    const auto first = run_benchmark(small_config("run_a"));
    const auto second = run_benchmark(small_config("run_b"));
    const std::vector<std::string> expected = {"error_log.csv",  "linear_regression.csv", "observed_eta.csv",
                                               "observed_theta.csv", "true_eta.csv",     "true_theta.csv"};
    CHECK(first.files == expected);
    for (const auto& f : expected) {
        const auto table = read_csv(first.directory / f);
        CHECK(table.header.size() == 2);
        CHECK(!table.rows.empty());
        CHECK(slurp(first.directory / f) == slurp(second.directory / f));
    }
    const auto log = read_csv(first.directory / "error_log.csv");
    CHECK(log.header == std::vector<std::string>{"iteration", "ln_error"});
    CHECK(log.rows.size() == 51);
    CHECK(log.rows.back()[1] == std::log(first.final_residual));
    const auto eta = read_csv(first.directory / "observed_eta.csv");
    CHECK(eta.rows.size() == 20);
    CHECK(eta.rows.front()[0] == doctest::Approx(0.5));
    CHECK(eta.rows.back()[0] == 10.0);
    REQUIRE(first.fit.has_value());
    CHECK(first.fit->slope < 0.0);
}

TEST_CASE("infinite tolerance stops before iterating") {
    auto c = small_config("inf_tol");
    c.solver.tolerance = std::numeric_limits<double>::infinity();
    const auto set = run_benchmark(c);
    CHECK(set.report.iterations == 0);
    CHECK(set.report.residuals.size() == 1);
    CHECK(!set.fit.has_value());
}

TEST_CASE("divergence is reported") {
    auto c = small_config("diverge");
    c.solver.step = 5.0;
    const auto set = run_benchmark(c);
    CHECK(set.report.stop_reason == StopReason::diverged);
    CHECK(!set.report.diagnosis.empty());
}

TEST_CASE("csv keeps full precision") {
    const fs::path path = fs::path("harness_out") / "precision.csv";
    fs::create_directories(path.parent_path());
    const CsvTable table{{"a", "b"}, {{0.1, 1e-300}, {std::nextafter(1.0, 2.0), -2.5e-13}}};
    write_csv(path, table);
    const auto back = read_csv(path);
    CHECK(back.header == table.header);
    CHECK(back.rows == table.rows);
}

TEST_CASE("common-noise run refuses oversized requests") {
    auto c = small_config("too_big");
    c.n_paths = 100000;
    c.n_steps = 100;
    c.n_common = 1000;
    c.memory_budget_mb = 64;
    try {
        run_common_noise_demo(c);
        FAIL("expected a refusal");
    } catch (const ResourceError& e) {
        CHECK(std::string(e.what()).find("MB") != std::string::npos);
    }
    CHECK(!fs::exists(c.output));
}

TEST_CASE("degenerate common noise matches the plain run") {
    auto c = small_config("degenerate");
    c.n_common = 4;
    c.solver.max_iterations = 30;
    const auto out = run_common_noise_demo(c);
    REQUIRE(out.max_equivalence_gap.has_value());
    CHECK(*out.max_equivalence_gap <= 1e-12);
    CHECK(out.per_path_residuals.size() == 31);
    CHECK(out.per_path_residuals.front().size() == 4);
    const auto per_path = read_csv(c.output / "per_path_error_log.csv");
    CHECK(per_path.header.size() == 5);
    CHECK(read_csv(c.output / "equivalence.csv").rows.size() == 31);
}

TEST_CASE("shifted benchmark with additive common noise converges") {
    auto c = small_config("shifted");
    c.problem = "shifted_benchmark";
    c.n_common = 8;
    c.sigma0 = 0.5;
    c.solver.max_iterations = 60;
    const auto out = run_common_noise_demo(c);
    REQUIRE(out.artifacts.fit.has_value());
    CHECK(out.artifacts.fit->slope < 0.0);
    CHECK(!out.max_equivalence_gap.has_value());
}

TEST_CASE("common path count has a bounded effect on the final residual") {
    auto c16 = small_config("n0_16");
    c16.problem = "shifted_benchmark";
    c16.sigma0 = 0.5;
    c16.n_common = 16;
    c16.solver.max_iterations = 40;
    auto c64 = c16;
    c64.n_common = 64;
    c64.output = fs::path("harness_out") / "n0_64";
    const double r16 = run_common_noise_demo(c16).artifacts.final_residual;
    const double r64 = run_common_noise_demo(c64).artifacts.final_residual;
    MESSAGE("final residuals " << r16 << " and " << r64);
    CHECK(std::max(r16, r64) <= 2.0 * std::min(r16, r64));
}

TEST_CASE("custom problems") {
    CHECK(problem_names() == std::vector<std::string>{"benchmark", "hjb_quadratic", "lq_mfgc"});
    auto c = small_config("lq");
    c.problem = "lq_mfgc";
    c.lq.terminal_slope = 1.0;
    c.lq.mean_weight = 0.2;
    c.solver.step = 0.04;
    const auto set = run_custom(c);
    CHECK(set.report.stop_reason == StopReason::max_iterations);
    CHECK(!set.max_eta_error.has_value());
    REQUIRE(set.fit.has_value());
    CHECK(set.fit->slope < 0.0);
    c.problem = "shifted_benchmark";
    CHECK_THROWS_AS(run_custom(c), ConfigError);
}

TEST_CASE("validation suite passes and catches injected faults") {
    CHECK(validate_install().all_passed());
    const auto theta = validate_install(InjectedFault::theta_printed_limit);
    CHECK(!theta.all_passed());
    for (const auto& check : theta.checks) {
        if (!check.passed) CHECK(check.name.find("oracle") != std::string::npos);
    }
    const auto seed = validate_install(InjectedFault::tampered_seed);
    CHECK(!seed.all_passed());
    for (const auto& check : seed.checks) {
        if (!check.passed) CHECK(check.name.find("noise bank") != std::string::npos);
    }
}

}
