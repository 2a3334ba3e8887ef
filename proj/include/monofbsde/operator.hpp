#pragma once

#include "monofbsde/backward.hpp"
#include "monofbsde/coefficients.hpp"
#include "monofbsde/forward.hpp"
#include "monofbsde/noise_bank.hpp"
#include "monofbsde/regression.hpp"

#include <functional>
#include <optional>

namespace monofbsde {

struct CommonDynamics {
    CommonDrift drift;  // b; empty means b == 0
    double sigma0 = 0.0;
};

/// Everything v depends on besides the control. Immutable once built, so the noise bank
/// (and the common paths derived from it) are the same for every evaluation.
class OperatorContext {
public:
    OperatorContext(OperatorTerms terms, NoiseBank bank, TimeGrid grid, RegressionBasis basis, double sigma,
                    std::optional<CommonDynamics> common = std::nullopt);

    const OperatorTerms& terms() const { return terms_; }
    const NoiseBank& bank() const { return bank_; }
    const TimeGrid& grid() const { return grid_; }
    const RegressionBasis& basis() const { return basis_; }
    double sigma() const { return sigma_; }
    bool has_common() const { return common_.has_value(); }
    const std::optional<CommonDynamics>& common() const { return common_; }
    /// Common-noise states indexed [k][j]; only meaningful when has_common().
    const ProcessGrid<double>& common_paths() const { return common_paths_; }
    std::size_t n_common() const { return has_common() ? bank_.n_common : 1; }

    ControlGrid zero_control() const;

private:
    OperatorTerms terms_;
    NoiseBank bank_;
    TimeGrid grid_;
    RegressionBasis basis_;
    double sigma_;
    std::optional<CommonDynamics> common_;
    ProcessGrid<double> common_paths_;
};

OperatorContext make_fbsde_context(const ProblemCoefficients& coeffs, NoiseBank bank, TimeGrid grid,
                                   RegressionBasis basis, double sigma,
                                   std::optional<CommonDynamics> common = std::nullopt);

/// Wires a mean field game of controls into the same pipeline; no inverse of F is needed.
OperatorContext mfgc_as_fbsde(const MfgcCoefficients& coeffs, NoiseBank bank, TimeGrid grid, RegressionBasis basis,
                              double sigma);

struct Evaluation {
    PathGrid paths;
    BackwardGrid backward;
    ControlGrid residual;
};

/// Forward paths, backward values and residual v(alpha) = residual_term(X, alpha, mu) - U.
Evaluation evaluate(const OperatorContext& ctx, const ControlGrid& control);

/// v(alpha)[j] = F_inv(X[j], alpha[j], mu[j]) - U[j], j = 0..N_t-1.
ControlGrid eval_v(const OperatorContext& ctx, const ControlGrid& control);
/// v(alpha)[j] = grad_alpha L(X[j], alpha[j], mu[j]) - U[j]; ctx must come from mfgc_as_fbsde.
ControlGrid eval_v_mfgc(const OperatorContext& ctx, const ControlGrid& control);
/// Common-noise residual on a control indexed [i][j][k].
ControlGrid eval_v_common(const OperatorContext& ctx, const ControlGrid& control);

/// Operator as a plain callable, the form the iteration schemes consume.
using ResidualOperator = std::function<ControlGrid(const ControlGrid&)>;
ResidualOperator as_operator(const OperatorContext& ctx);

using PointwiseMap = std::function<Vector(const Vector& x, const Vector& u)>;

struct InverseOptions {
    double tolerance = 1e-10;
    int max_iterations = 100;
    double fd_step = 1e-7;
};

/// Solves F(x, u) = target for u by damped Newton with a finite-difference Jacobian.
/// Throws ConvergenceError naming the point when the tolerance is not met.
Vector pointwise_inverse(const PointwiseMap& F, const Vector& x, const Vector& target, const Vector& initial,
                         const InverseOptions& options = {});

}  // namespace monofbsde
