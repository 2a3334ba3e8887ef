#include "monofbsde/harness.hpp"

#include "monofbsde/csv.hpp"
#include "monofbsde/oracle.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace monofbsde {

namespace {

constexpr std::uint64_t validation_seed = 20241016;
// Sum of all increments of generate_noise_bank(validation_seed, 64, TimeGrid(1, 8), dirac(0)).
constexpr double frozen_increment_sum = -3.57358658474016;

std::string fmt(double value) {
    std::ostringstream out;
    out.precision(3);
    out << std::scientific << value;
    return out.str();
}

ValidationCheck norms_check() {
    const TimeGrid grid(2.0, 20);
    ControlGrid ones = make_control(5, grid, 1, 1, 1.0);
    ControlGrid twos = make_control(5, grid, 1, 1, 2.0);
    const double n1 = norm_T(ones, grid);
    const double ip = inner_T(ones, twos, grid);
    const double err = std::max(std::abs(n1 - std::sqrt(2.0)), std::abs(ip - 4.0));
    return {"norm_T and inner_T of constant controls", err <= 1e-14, "error " + fmt(err)};
}

ValidationCheck determinism_check(InjectedFault fault) {
    const std::uint64_t seed = fault == InjectedFault::tampered_seed ? validation_seed + 1 : validation_seed;
    const TimeGrid grid(1.0, 8);
    const NoiseBank first = generate_noise_bank(seed, 64, grid, InitialLaw::dirac(0.0));
    const NoiseBank second = generate_noise_bank(seed, 64, grid, InitialLaw::dirac(0.0));
    const double sum = first.g.flat().sum();
    const bool passed = first == second && sum == frozen_increment_sum;
    return {"noise bank reproduces its frozen fingerprint", passed,
            "increment sum " + format_double(sum) + ", expected " + format_double(frozen_increment_sum)};
}

ValidationCheck regression_check() {
    std::mt19937_64 rng(validation_seed);
    std::normal_distribution<double> normal;
    const Eigen::Index n = 2000;
    Matrix x(n, 1), poly(n, 1), noisy(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.5 * normal(rng) + 0.3;
        poly(i, 0) = 1.0 + x(i, 0) - 0.5 * std::pow(x(i, 0), 3);
        noisy(i, 0) = std::sin(x(i, 0)) + normal(rng);
    }
    const RegressionBasis basis;
    const RegressionFit exact = fit_conditional_expectation(poly, x, basis);
    const double reproduce = (exact.fitted() - poly).cwiseAbs().maxCoeff() / poly.cwiseAbs().maxCoeff();
    const RegressionFit fit = fit_conditional_expectation(noisy, x, basis);
    const Matrix design = fit.design(x);
    const double orth = (design.transpose() * (noisy - fit.fitted())).cwiseAbs().maxCoeff() / static_cast<double>(n);
    const bool passed = reproduce <= 1e-9 && orth <= 1e-9;
    return {"regression reproduces polynomials and leaves orthogonal residuals", passed,
            "reproduction " + fmt(reproduce) + ", orthogonality " + fmt(orth)};
}

ValidationCheck geg_check() {
    std::mt19937_64 rng(validation_seed);
    std::uniform_int_distribution<int> dim_dist(1, 8), steps_dist(1, 20);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal;
    double worst = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        const int d = dim_dist(rng);
        const int n = steps_dist(rng);
        std::vector<double> steps(static_cast<std::size_t>(n) + 1);
        double g = 0.05 + unit(rng);
        for (auto& s : steps) {
            s = g;
            g *= 0.5 + 0.5 * unit(rng);
        }
        std::vector<Vector> v, v_half;
        for (int i = 0; i < n; ++i) {
            v.push_back(Vector::NullaryExpr(d, [&] { return normal(rng); }));
            v_half.push_back(Vector::NullaryExpr(d, [&] { return normal(rng); }));
        }
        const Vector x1 = Vector::NullaryExpr(d, [&] { return normal(rng); });
        const Vector x = Vector::NullaryExpr(d, [&] { return normal(rng); });
        double scale = 1.0 + x.squaredNorm() + x1.squaredNorm();
        for (int i = 0; i < n; ++i) scale += v[i].squaredNorm() + v_half[i].squaredNorm();
        worst = std::min(worst, geg_inequality_slack(steps, v, v_half, x1, x) / scale);
    }
    return {"extragradient inequality on 100 random instances", worst >= -1e-9, "worst scaled slack " + fmt(worst)};
}

ValidationCheck oracle_check(InjectedFault fault) {
    OracleOptions options;
    if (fault == InjectedFault::theta_printed_limit) options.theta_limit = ThetaLimit::printed_typo;
    const BenchmarkOracle oracle(BenchmarkParams{}, options);
    const OdeResiduals r = oracle_ode_residuals(oracle, 2000);
    const bool passed = r.eta <= 1e-12 && r.theta <= 1e-6 && r.theta_terminal == 0.0;
    return {"oracle satisfies its ODEs", passed,
            "eta " + fmt(r.eta) + ", theta " + fmt(r.theta) + ", |theta(T)| " + fmt(r.theta_terminal)};
}

ValidationCheck mini_solve_check() {
    ExperimentConfig config;
    config.n_paths = 400;
    config.n_steps = 20;
    config.benchmark.horizon = 2.0;
    config.solver.max_iterations = 30;
    config.solver.step = 0.3;
    config.seed = validation_seed;
    const OperatorContext ctx = build_context(config);
    const RunReport a = solve(as_operator(ctx), ctx.grid(), ctx.zero_control(), config.solver);
    const RunReport b = solve(as_operator(ctx), ctx.grid(), ctx.zero_control(), config.solver);
    const bool same = a.residuals == b.residuals;
    const bool decreased = a.residuals.back() < 0.1 * a.residuals.front();
    return {"small benchmark solve is deterministic and converging", same && decreased,
            "residual " + fmt(a.residuals.front()) + " -> " + fmt(a.residuals.back())};
}

}  // namespace

ValidationReport validate_install(InjectedFault fault) {
    ValidationReport report;
    const auto guarded = [&](auto&& check) {
        try {
            report.checks.push_back(check());
        } catch (const std::exception& e) {
            report.checks.push_back({"check raised", false, e.what()});
        }
    };
    guarded(norms_check);
    guarded([&] { return determinism_check(fault); });
    guarded(regression_check);
    guarded(geg_check);
    guarded([&] { return oracle_check(fault); });
    guarded(mini_solve_check);
    return report;
}

}  // namespace monofbsde
