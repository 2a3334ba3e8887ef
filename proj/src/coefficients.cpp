#include "monofbsde/coefficients.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace monofbsde {

double round_trip_error(const ProblemCoefficients& coeffs, std::uint64_t seed, std::size_t n_samples) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<Eigen::Index>(n_samples);
    const auto d = static_cast<Eigen::Index>(coeffs.dim);
    Matrix x(n, d), cloud_alpha(n, d), a(n, d);
    for (double& v : x.reshaped()) v = 3.0 * normal(rng);
    for (double& v : cloud_alpha.reshaped()) v = 3.0 * normal(rng);
    for (double& v : a.reshaped()) v = 3.0 * normal(rng);
    Vector p;
    if (coeffs.common_noise_aware) {
        p = Vector(1);
        p(0) = normal(rng);
    }
    const Cloud cloud{x, cloud_alpha, p};
    const Matrix u = coeffs.drift_inverse(cloud, a);
    const Matrix back = coeffs.drift(cloud, u);
    return ((back - a).array().abs() / a.array().abs().max(1.0)).maxCoeff();
}

void validate_problem(const ProblemCoefficients& coeffs, std::uint64_t seed) {
    if (coeffs.dim == 0) throw std::invalid_argument("problem '" + coeffs.name + "': dimension must be positive");
    if (!coeffs.drift || !coeffs.driver || !coeffs.terminal || !coeffs.drift_inverse) {
        throw std::invalid_argument("problem '" + coeffs.name + "': F, G, g and F_inv must all be supplied");
    }
    if (!coeffs.law_of_u_free) {
        throw std::invalid_argument("problem '" + coeffs.name +
                                    "': F depends on the law of U, so its inverse is not available pointwise");
    }
    const double err = round_trip_error(coeffs, seed);
    if (!(err <= 1e-10)) {
        throw std::invalid_argument("problem '" + coeffs.name + "': F(x, F_inv(x, a)) != a (max error " +
                                    std::to_string(err) + ")");
    }
}

}  // namespace monofbsde
