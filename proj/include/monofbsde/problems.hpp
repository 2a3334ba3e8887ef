#pragma once

#include "monofbsde/coefficients.hpp"
#include "monofbsde/operator.hpp"

#include <functional>
#include <string>
#include <vector>

namespace monofbsde {

using ScalarFunction = std::function<double(double)>;

/// Named scalar functions usable from text configs: "atan_shift" (atan(x - 1)), "identity",
/// "zero", "tanh", "atan".
ScalarFunction scalar_function(const std::string& name);
std::vector<std::string> scalar_function_names();

/// Parameters of the one-dimensional mean-field benchmark
///   X_t = x0 - int a U ds + sqrt(2 sigma) B_t,
///   U_t = b X_T + int_t^T (c X_s + E[f(X_s - E X_s)]) ds - int Z dB.
struct BenchmarkParams {
    double a = 1.0;
    double b = 1.0;
    double c = 0.0;
    double sigma = 1.0;
    double x0 = 1.0;
    double horizon = 10.0;
    std::string f_name = "atan_shift";
};

/// F = a u, G = c x + mean_k f(x_k - xbar), g = b x, F_inv = alpha / a.
ProblemCoefficients benchmark_coefficients(const BenchmarkParams& params);

/// The benchmark with additive common noise sqrt(2 sigma0) W, written for Y = X - p with
/// p = sqrt(2 sigma0) W: G(y, p) = c (y + p) + mean_k f(y_k - ybar), g(y, p) = b (y + p).
ProblemCoefficients shifted_benchmark_coefficients(const BenchmarkParams& params);

/// Linear-quadratic mean field game of controls with
///   grad_alpha L = alpha, grad_x L = state_weight x + mean_weight xbar,
///   grad_x g = terminal_slope x + terminal_offset.
struct LqMfgcParams {
    double state_weight = 0.0;
    double mean_weight = 0.0;
    double terminal_slope = 0.0;
    double terminal_offset = 0.0;
};
MfgcCoefficients lq_mfgc(const LqMfgcParams& params);

using PointwiseTerminal = std::function<Vector(const Vector& x)>;

/// Adapter for coefficients blind to the empirical measure (finite-dimensional control,
/// HJB characteristics). When `inverse` is empty F_inv is computed by pointwise Newton.
ProblemCoefficients measure_free_problem(std::string name, std::size_t dim, PointwiseMap F, PointwiseMap G,
                                         PointwiseTerminal g, PointwiseMap inverse = {});

}  // namespace monofbsde
