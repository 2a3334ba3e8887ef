#pragma once

#include "monofbsde/grid.hpp"
#include "monofbsde/operator.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace monofbsde {

enum class SolverMode { constant_extragradient, dual_extrapolation };
enum class StopControl { last, averaged };
enum class StopReason { converged, max_iterations, diverged };

std::string to_string(SolverMode mode);
std::string to_string(StopReason reason);

/// Step sizes gamma_n = step * n^(-decay); decay = 0 is a constant step.
struct SolverConfig {
    SolverMode mode = SolverMode::constant_extragradient;
    double step = 0.08;
    double decay = 0.0;
    double tolerance = 0.0;        // stop once the stopping residual is <= tolerance
    int max_iterations = 200;
    StopControl stop_on = StopControl::last;
    /// Evaluate ||v(averaged control)|| every this many iterations (0 = only when stopping on it).
    int averaged_every = 0;
    /// Halt when the residual exceeds this multiple of its running minimum.
    double divergence_factor = 10.0;

    double step_at(int n) const;
    void validate() const;
};

struct RunReport {
    /// ||v(alpha_n)||_T for n = 1..iterations+1 (entry 0 is the initial control).
    std::vector<double> residuals;
    /// (iteration, ||v(averaged_n)||_T) wherever the averaged residual was evaluated.
    std::vector<std::pair<int, double>> averaged_residuals;
    std::vector<double> seconds_per_iteration;
    /// ||alpha_n - reference||_T, when a reference control was supplied.
    std::vector<double> reference_distances;
    ControlGrid last;
    ControlGrid averaged;
    int iterations = 0;
    int operator_evaluations = 0;
    StopReason stop_reason = StopReason::max_iterations;
    std::string diagnosis;
};

struct SolveOptions {
    const ControlGrid* reference = nullptr;
    /// Called with (n, alpha_n, v(alpha_n)) for the initial control (n = 0) and after every iteration.
    std::function<void(int, const ControlGrid&, const ControlGrid&)> on_iterate;
};

/// alpha_{n+1/2} = alpha_n - gamma v(alpha_n), alpha_{n+1} = alpha_n - gamma v(alpha_{n+1/2}),
/// with the running mean of the half iterates. Throws NumericalError on a non-finite residual.
RunReport extragradient_constant(const ResidualOperator& v, const TimeGrid& grid, const ControlGrid& initial,
                                 const SolverConfig& config, const SolveOptions& options = {});

/// alpha_{n+1/2} = alpha_n - gamma_n v(alpha_n), Y_{n+1} = Y_n - v(alpha_{n+1/2}),
/// alpha_{n+1} = gamma_{n+1} Y_{n+1}, Y_1 = alpha_1 / gamma_1.
RunReport dual_extrapolation(const ResidualOperator& v, const TimeGrid& grid, const ControlGrid& initial,
                             const SolverConfig& config, const SolveOptions& options = {});

/// Dispatches on config.mode.
RunReport solve(const ResidualOperator& v, const TimeGrid& grid, const ControlGrid& initial,
                const SolverConfig& config, const SolveOptions& options = {});

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
    std::vector<std::string> warnings;
};

/// OLS of ln(residuals[n]) on n over n >= burn_in (and n <= last, when given). Nonpositive
/// entries are skipped with a warning; fewer than 10 usable points throws.
SlopeFit fit_log_error_slope(const std::vector<double>& residuals, std::size_t burn_in,
                             std::optional<std::size_t> last = std::nullopt);
inline SlopeFit fit_log_error_slope(const RunReport& report, std::size_t burn_in,
                                    std::optional<std::size_t> last = std::nullopt) {
    return fit_log_error_slope(report.residuals, burn_in, last);
}

/// ||alpha_{n+1} - alpha*|| / ||alpha_n - alpha*|| for consecutive entries; a zero
/// denominator gives a ratio of 1 when the numerator is also zero.
std::vector<double> last_iterate_contraction_probe(const std::vector<double>& reference_distances);
inline std::vector<double> last_iterate_contraction_probe(const RunReport& report) {
    return last_iterate_contraction_probe(report.reference_distances);
}

/// Right-hand side minus left-hand side of the generalized extragradient inequality
///   sum_i <V_{i+1/2}, X_{i+1/2} - x> <= |x - X_1|^2 / (2 g_1) + (1/(2 g_{n+1}) - 1/(2 g_1)) |x|^2
///                                      + 1/2 sum_i (g_i |V_{i+1/2} - V_i|^2 - |X_{i+1/2} - X_i|^2 / g_i)
/// for the dual-extrapolation recursion driven by arbitrary V_i, V_{i+1/2}. `steps` holds
/// g_1..g_{n+1} (non-increasing, positive); `v` and `v_half` hold n vectors each.
double geg_inequality_slack(const std::vector<double>& steps, const std::vector<Vector>& v,
                            const std::vector<Vector>& v_half, const Vector& x1, const Vector& x);

}  // namespace monofbsde
