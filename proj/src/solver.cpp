#include "monofbsde/solver.hpp"

#include "monofbsde/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace monofbsde {

std::string to_string(SolverMode mode) {
    return mode == SolverMode::constant_extragradient ? "constant-extragradient" : "dual-extrapolation";
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::converged: return "converged";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::diverged: return "diverged";
    }
    return "unknown";
}

double SolverConfig::step_at(int n) const {
    return decay == 0.0 ? step : step * std::pow(static_cast<double>(n), -decay);
}

void SolverConfig::validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("SolverConfig: step must be positive");
    if (mode == SolverMode::dual_extrapolation) {
        if (!(decay >= 0.0 && decay < 1.0)) throw std::invalid_argument("SolverConfig: decay must lie in [0, 1)");
    } else if (decay != 0.0) {
        throw std::invalid_argument("SolverConfig: constant extragradient takes a constant step");
    }
    if (max_iterations < 0) throw std::invalid_argument("SolverConfig: max_iterations must be >= 0");
    if (averaged_every < 0) throw std::invalid_argument("SolverConfig: averaged_every must be >= 0");
    if (!(divergence_factor > 1.0)) throw std::invalid_argument("SolverConfig: divergence_factor must exceed 1");
}

namespace {

double checked_norm(const ControlGrid& residual, const TimeGrid& grid, int iteration) {
    const double value = norm_T(residual, grid);
    if (!std::isfinite(value)) {
        throw NumericalError("non-finite operator residual at iteration " + std::to_string(iteration));
    }
    return value;
}

RunReport iterate(const ResidualOperator& v, const TimeGrid& grid, const ControlGrid& initial,
                  const SolverConfig& config, const SolveOptions& options) {
    config.validate();
    if (!initial.all_finite()) throw std::invalid_argument("solver: initial control has non-finite entries");
    const bool dual = config.mode == SolverMode::dual_extrapolation;
    const bool stop_on_average = config.stop_on == StopControl::averaged;
    const int average_stride = config.averaged_every > 0 ? config.averaged_every : (stop_on_average ? 1 : 0);

    RunReport report;
    ControlGrid alpha = initial;
    ControlGrid r = v(alpha);
    ++report.operator_evaluations;
    report.residuals.push_back(checked_norm(r, grid, 0));
    if (options.reference) report.reference_distances.push_back(norm_T(alpha - *options.reference, grid));
    // Before any iteration the averaged control is the initial one.
    report.averaged = alpha;
    if (options.on_iterate) options.on_iterate(0, alpha, r);
    if (average_stride > 0) report.averaged_residuals.emplace_back(0, report.residuals.back());

    double stop_value = report.residuals.back();
    double best = stop_value;
    ControlGrid accumulator;  // Y, dual extrapolation only
    if (dual) accumulator = (1.0 / config.step_at(1)) * alpha;

    report.stop_reason = StopReason::max_iterations;
    if (stop_value <= config.tolerance) {
        report.stop_reason = StopReason::converged;
    }
    for (int n = 1; n <= config.max_iterations && report.stop_reason != StopReason::converged; ++n) {
        const auto start = std::chrono::steady_clock::now();
        const double gamma = config.step_at(n);

        ControlGrid half = alpha;
        half.flat() -= gamma * r.flat();
        const ControlGrid r_half = v(half);
        ++report.operator_evaluations;
        checked_norm(r_half, grid, n);

        if (dual) {
            accumulator -= r_half;
            alpha = config.step_at(n + 1) * accumulator;
        } else {
            alpha.flat() -= gamma * r_half.flat();
        }
        // Running mean of the half iterates.
        if (n == 1) {
            report.averaged = half;
        } else {
            report.averaged.flat() += (half.flat() - report.averaged.flat()) / static_cast<double>(n);
        }

        r = v(alpha);
        ++report.operator_evaluations;
        report.residuals.push_back(checked_norm(r, grid, n));
        if (options.reference) report.reference_distances.push_back(norm_T(alpha - *options.reference, grid));
        report.iterations = n;
        if (options.on_iterate) options.on_iterate(n, alpha, r);

        double averaged_value = std::numeric_limits<double>::quiet_NaN();
        if (average_stride > 0 && (n % average_stride == 0 || n == config.max_iterations)) {
            averaged_value = checked_norm(v(report.averaged), grid, n);
            ++report.operator_evaluations;
            report.averaged_residuals.emplace_back(n, averaged_value);
        }
        report.seconds_per_iteration.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());

        if (stop_on_average) {
            if (!std::isnan(averaged_value)) stop_value = averaged_value;
        } else {
            stop_value = report.residuals.back();
        }
        best = std::min(best, stop_value);
        if (stop_value <= config.tolerance) {
            report.stop_reason = StopReason::converged;
        } else if (stop_value > config.divergence_factor * best) {
            report.stop_reason = StopReason::diverged;
            report.diagnosis = "step too large: residual " + std::to_string(stop_value) + " at iteration " +
                               std::to_string(n) + " exceeds " + std::to_string(config.divergence_factor) +
                               "x its minimum " + std::to_string(best);
            break;
        }
    }
    report.last = std::move(alpha);
    return report;
}

}  // namespace

RunReport extragradient_constant(const ResidualOperator& v, const TimeGrid& grid, const ControlGrid& initial,
                                 const SolverConfig& config, const SolveOptions& options) {
    SolverConfig cfg = config;
    cfg.mode = SolverMode::constant_extragradient;
    return iterate(v, grid, initial, cfg, options);
}

RunReport dual_extrapolation(const ResidualOperator& v, const TimeGrid& grid, const ControlGrid& initial,
                             const SolverConfig& config, const SolveOptions& options) {
    SolverConfig cfg = config;
    cfg.mode = SolverMode::dual_extrapolation;
    return iterate(v, grid, initial, cfg, options);
}

RunReport solve(const ResidualOperator& v, const TimeGrid& grid, const ControlGrid& initial,
                const SolverConfig& config, const SolveOptions& options) {
    return iterate(v, grid, initial, config, options);
}

SlopeFit fit_log_error_slope(const std::vector<double>& residuals, std::size_t burn_in,
                             std::optional<std::size_t> last) {
    SlopeFit fit;
    const std::size_t end = last ? std::min(*last + 1, residuals.size()) : residuals.size();
    std::vector<double> xs, ys;
    for (std::size_t n = burn_in; n < end; ++n) {
        if (!(residuals[n] > 0.0)) {
            fit.warnings.push_back("skipped nonpositive residual at iteration " + std::to_string(n));
            continue;
        }
        xs.push_back(static_cast<double>(n));
        ys.push_back(std::log(residuals[n]));
    }
    if (xs.size() < 10) throw std::invalid_argument("fit_log_error_slope: fewer than 10 usable points");
    const auto m = static_cast<Eigen::Index>(xs.size());
    const Eigen::Map<const Vector> x(xs.data(), m), y(ys.data(), m);
    const double x_mean = x.mean(), y_mean = y.mean();
    const double sxx = (x.array() - x_mean).square().sum();
    const double sxy = ((x.array() - x_mean) * (y.array() - y_mean)).sum();
    const double syy = (y.array() - y_mean).square().sum();
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * x_mean;
    fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.points = xs.size();
    return fit;
}

double geg_inequality_slack(const std::vector<double>& steps, const std::vector<Vector>& v,
                            const std::vector<Vector>& v_half, const Vector& x1, const Vector& x) {
    const std::size_t n = v.size();
    if (v_half.size() != n || steps.size() != n + 1 || n == 0) {
        throw std::invalid_argument("geg_inequality_slack: need n >= 1 vectors and n + 1 steps");
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (!(steps[i] > 0.0) || (i > 0 && steps[i] > steps[i - 1])) {
            throw std::invalid_argument("geg_inequality_slack: steps must be positive and non-increasing");
        }
    }
    Vector current = x1;
    Vector accumulator = x1 / steps[0];
    double lhs = 0.0;
    double correction = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vector half = current - steps[i] * v[i];
        lhs += v_half[i].dot(half - x);
        correction += steps[i] * (v_half[i] - v[i]).squaredNorm() - (half - current).squaredNorm() / steps[i];
        accumulator -= v_half[i];
        current = steps[i + 1] * accumulator;
    }
    const double rhs = (x - x1).squaredNorm() / (2.0 * steps[0]) +
                       (1.0 / (2.0 * steps[n]) - 1.0 / (2.0 * steps[0])) * x.squaredNorm() + 0.5 * correction;
    return rhs - lhs;
}

std::vector<double> last_iterate_contraction_probe(const std::vector<double>& reference_distances) {
    std::vector<double> ratios;
    for (std::size_t n = 0; n + 1 < reference_distances.size(); ++n) {
        const double prev = reference_distances[n];
        const double next = reference_distances[n + 1];
        ratios.push_back(prev > 0.0 ? next / prev : (next == 0.0 ? 1.0 : std::numeric_limits<double>::infinity()));
    }
    return ratios;
}

}  // namespace monofbsde
