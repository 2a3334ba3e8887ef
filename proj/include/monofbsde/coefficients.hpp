#pragma once

#include "monofbsde/grid.hpp"

#include <cstdint>
#include <functional>
#include <string>

namespace monofbsde {

/// Empirical measure at one time step, seen as the paired sample arrays (x_k, alpha_k) of
/// one common-noise path, plus that path's common state p (empty without common noise).
struct Cloud {
    const Matrix& x;
    const Matrix& alpha;
    const Vector& p;
};

/// Row-wise field evaluated on a whole slice: (cloud, second argument) -> n_paths x d.
/// The second argument is u for F and G, and the control for F_inv.
using SliceField = std::function<Matrix(const Cloud&, const Matrix&)>;
/// Terminal field g(x, p, mu) on a whole slice.
using TerminalField = std::function<Matrix(const Cloud&)>;

/// Coefficients (F, G, g, F_inv) of a mean-field FBSDE
///   X_t = X_0 - int F(X, U, mu) ds + sqrt(2 sigma) B_t,  U_t = g(X_T, mu_T) + int_t^T G(X, U, mu) ds - ...
struct ProblemCoefficients {
    std::string name;
    std::size_t dim = 1;
    SliceField drift;          // F
    SliceField driver;         // G
    TerminalField terminal;    // g
    SliceField drift_inverse;  // F_inv, with F(x, F_inv(x, a, mu), mu) = a
    bool law_of_u_free = true;
    bool common_noise_aware = false;
};

/// Mean field game of controls, given through the gradients of the running and terminal costs.
struct MfgcCoefficients {
    std::string name;
    std::size_t dim = 1;
    SliceField grad_x_L;       // second argument: control
    SliceField grad_alpha_L;   // second argument: control
    TerminalField grad_x_g;
};

/// Maximum of |F(x, F_inv(x, a, mu), mu) - a| / max(1, |a|) over `n_samples` random points
/// and a random cloud of the same size.
double round_trip_error(const ProblemCoefficients& coeffs, std::uint64_t seed, std::size_t n_samples = 1000);

/// Registration checks: all fields present, F independent of the law of U, and the F o F_inv
/// round trip within 1e-10. Throws std::invalid_argument.
void validate_problem(const ProblemCoefficients& coeffs, std::uint64_t seed = 7);

}  // namespace monofbsde
