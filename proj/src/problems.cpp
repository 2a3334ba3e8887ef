#include "monofbsde/problems.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace monofbsde {

namespace {

const std::map<std::string, ScalarFunction>& function_registry() {
    static const std::map<std::string, ScalarFunction> registry = {
        {"atan_shift", [](double x) { return std::atan(x - 1.0); }},
        {"atan", [](double x) { return std::atan(x); }},
        {"identity", [](double x) { return x; }},
        {"tanh", [](double x) { return std::tanh(x); }},
        {"zero", [](double) { return 0.0; }},
    };
    return registry;
}

void check_params(const BenchmarkParams& params) {
    if (!(params.a > 0.0)) throw std::invalid_argument("benchmark: a must be positive (F_inv = alpha / a)");
    if (!(params.b >= 0.0) || !(params.c >= 0.0)) throw std::invalid_argument("benchmark: b and c must be >= 0");
    if (!(params.sigma > 0.0)) throw std::invalid_argument("benchmark: sigma must be positive");
    if (!(params.horizon > 0.0)) throw std::invalid_argument("benchmark: horizon must be positive");
}

/// mean_k f(x_k - xbar) over the first coordinate.
double centered_mean(const ScalarFunction& f, const Matrix& x) {
    const auto n = x.rows();
    double mean = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) mean += x(k, 0);
    mean /= static_cast<double>(n);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += f(x(k, 0) - mean);
    return acc / static_cast<double>(n);
}

}  // namespace

ScalarFunction scalar_function(const std::string& name) {
    const auto& registry = function_registry();
    const auto it = registry.find(name);
    if (it == registry.end()) throw std::invalid_argument("unknown scalar function '" + name + "'");
    return it->second;
}

std::vector<std::string> scalar_function_names() {
    std::vector<std::string> names;
    for (const auto& [name, fn] : function_registry()) names.push_back(name);
    return names;
}

ProblemCoefficients benchmark_coefficients(const BenchmarkParams& params) {
    check_params(params);
    const ScalarFunction f = scalar_function(params.f_name);
    const double a = params.a, b = params.b, c = params.c;

    ProblemCoefficients coeffs;
    coeffs.name = "benchmark";
    coeffs.dim = 1;
    coeffs.drift = [a](const Cloud&, const Matrix& u) -> Matrix { return a * u; };
    coeffs.drift_inverse = [a](const Cloud&, const Matrix& alpha) -> Matrix { return alpha / a; };
    coeffs.driver = [c, f](const Cloud& cloud, const Matrix&) -> Matrix {
        const double mean_field = centered_mean(f, cloud.x);
        return (c * cloud.x.array() + mean_field).matrix();
    };
    coeffs.terminal = [b](const Cloud& cloud) -> Matrix { return b * cloud.x; };
    validate_problem(coeffs);
    return coeffs;
}

ProblemCoefficients shifted_benchmark_coefficients(const BenchmarkParams& params) {
    check_params(params);
    const ScalarFunction f = scalar_function(params.f_name);
    const double a = params.a, b = params.b, c = params.c;

    ProblemCoefficients coeffs;
    coeffs.name = "shifted_benchmark";
    coeffs.dim = 1;
    coeffs.common_noise_aware = true;
    coeffs.drift = [a](const Cloud&, const Matrix& u) -> Matrix { return a * u; };
    coeffs.drift_inverse = [a](const Cloud&, const Matrix& alpha) -> Matrix { return alpha / a; };
    coeffs.driver = [c, f](const Cloud& cloud, const Matrix&) -> Matrix {
        const double shift = cloud.p.size() > 0 ? cloud.p(0) : 0.0;
        const double mean_field = centered_mean(f, cloud.x);
        return (c * (cloud.x.array() + shift) + mean_field).matrix();
    };
    coeffs.terminal = [b](const Cloud& cloud) -> Matrix {
        const double shift = cloud.p.size() > 0 ? cloud.p(0) : 0.0;
        return (b * (cloud.x.array() + shift)).matrix();
    };
    validate_problem(coeffs);
    return coeffs;
}

MfgcCoefficients lq_mfgc(const LqMfgcParams& params) {
    MfgcCoefficients coeffs;
    coeffs.name = "lq_mfgc";
    coeffs.dim = 1;
    coeffs.grad_alpha_L = [](const Cloud&, const Matrix& alpha) -> Matrix { return alpha; };
    coeffs.grad_x_L = [params](const Cloud& cloud, const Matrix&) -> Matrix {
        const double mean = cloud.x.col(0).mean();
        return (params.state_weight * cloud.x.array() + params.mean_weight * mean).matrix();
    };
    coeffs.grad_x_g = [params](const Cloud& cloud) -> Matrix {
        return (params.terminal_slope * cloud.x.array() + params.terminal_offset).matrix();
    };
    return coeffs;
}

ProblemCoefficients measure_free_problem(std::string name, std::size_t dim, PointwiseMap F, PointwiseMap G,
                                         PointwiseTerminal g, PointwiseMap inverse) {
    if (!F || !G || !g) throw std::invalid_argument("measure_free_problem: F, G and g are required");
    auto rowwise = [](PointwiseMap fn) {
        return [fn = std::move(fn)](const Cloud& cloud, const Matrix& arg) -> Matrix {
            Matrix out(arg.rows(), arg.cols());
            for (Eigen::Index i = 0; i < arg.rows(); ++i) {
                out.row(i) = fn(cloud.x.row(i).transpose(), arg.row(i).transpose()).transpose();
            }
            return out;
        };
    };
    if (!inverse) {
        inverse = [F](const Vector& x, const Vector& target) { return pointwise_inverse(F, x, target, target); };
    }

    ProblemCoefficients coeffs;
    coeffs.name = std::move(name);
    coeffs.dim = dim;
    coeffs.drift = rowwise(F);
    coeffs.driver = rowwise(std::move(G));
    coeffs.drift_inverse = rowwise(std::move(inverse));
    coeffs.terminal = [g = std::move(g)](const Cloud& cloud) -> Matrix {
        Matrix out(cloud.x.rows(), cloud.x.cols());
        for (Eigen::Index i = 0; i < cloud.x.rows(); ++i) out.row(i) = g(cloud.x.row(i).transpose()).transpose();
        return out;
    };
    validate_problem(coeffs);
    return coeffs;
}

}  // namespace monofbsde
