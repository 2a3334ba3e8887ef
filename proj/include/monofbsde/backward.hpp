#pragma once

#include "monofbsde/coefficients.hpp"
#include "monofbsde/grid.hpp"
#include "monofbsde/regression.hpp"

namespace monofbsde {

/// The three fields the decoupled backward pass and the residual need, whatever the problem
/// family: residual(x, alpha, mu) is F_inv or grad_alpha L, driver(x, alpha, mu) is
/// G(x, F_inv(x, alpha, mu), mu) or grad_x L, terminal is g or grad_x g.
struct OperatorTerms {
    std::string name;
    std::size_t dim = 1;
    SliceField residual;
    SliceField driver;
    TerminalField terminal;
    bool from_mfgc = false;
};

OperatorTerms terms_from(const ProblemCoefficients& coeffs);
OperatorTerms terms_from(const MfgcCoefficients& coeffs);

/// U[N_t] = g(X[N_t], mu[N_t]) and, for j = N_t-1..0,
///   U[j] = E[ U[j+1] + dt * driver(X[j+1], alpha[j+1], mu[j+1]) | X[j] ]
/// with the conditional expectation replaced by regression on the basis. The control at
/// index N_t does not exist and is taken equal to alpha[N_t-1].
BackwardGrid solve_backward(const PathGrid& paths, const ControlGrid& control, const OperatorTerms& terms,
                            const RegressionBasis& basis, const TimeGrid& grid);

/// Common-noise variant: the measure at (j, k) is the cloud over i for common path k, and the
/// regression pools all (i, k) onto the regressor (X[i][j][k], p[k][j]).
/// `common_paths` is indexed [k][j].
BackwardGrid solve_backward_common(const PathGrid& paths, const ProcessGrid<double>& common_paths,
                                   const ControlGrid& control, const OperatorTerms& terms,
                                   const RegressionBasis& basis, const TimeGrid& grid);

}  // namespace monofbsde
