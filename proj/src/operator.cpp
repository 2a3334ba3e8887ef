#include "monofbsde/operator.hpp"

#include "monofbsde/errors.hpp"

#include <sstream>

namespace monofbsde {

OperatorContext::OperatorContext(OperatorTerms terms, NoiseBank bank, TimeGrid grid, RegressionBasis basis,
                                 double sigma, std::optional<CommonDynamics> common)
    : terms_(std::move(terms)), bank_(std::move(bank)), grid_(grid), basis_(basis), sigma_(sigma),
      common_(std::move(common)) {
    if (!(sigma_ >= 0.0)) throw std::invalid_argument("OperatorContext: sigma must be nonnegative");
    if (bank_.n_steps != grid_.n_steps()) throw std::invalid_argument("OperatorContext: bank/grid step mismatch");
    if (bank_.dim != terms_.dim) throw std::invalid_argument("OperatorContext: bank/problem dimension mismatch");
    if (common_) {
        if (!bank_.has_common()) throw std::invalid_argument("OperatorContext: common dynamics need a common bank");
        common_paths_ = simulate_common(bank_, common_->drift, grid_, common_->sigma0);
    }
}

ControlGrid OperatorContext::zero_control() const {
    return make_control(bank_.n_paths, grid_, bank_.dim, n_common());
}

OperatorContext make_fbsde_context(const ProblemCoefficients& coeffs, NoiseBank bank, TimeGrid grid,
                                   RegressionBasis basis, double sigma, std::optional<CommonDynamics> common) {
    return OperatorContext(terms_from(coeffs), std::move(bank), grid, basis, sigma, std::move(common));
}

OperatorContext mfgc_as_fbsde(const MfgcCoefficients& coeffs, NoiseBank bank, TimeGrid grid, RegressionBasis basis,
                              double sigma) {
    return OperatorContext(terms_from(coeffs), std::move(bank), grid, basis, sigma);
}

Evaluation evaluate(const OperatorContext& ctx, const ControlGrid& control) {
    const TimeGrid& grid = ctx.grid();
    if (control.n_paths() != ctx.bank().n_paths || control.n_times() != grid.n_steps() ||
        control.dim() != ctx.bank().dim || control.n_common() != ctx.n_common()) {
        throw std::invalid_argument("eval_v: control shape does not match the operator context");
    }
    Evaluation out;
    out.paths = simulate_forward(control, ctx.bank(), grid, ctx.sigma());
    out.backward = ctx.has_common()
                       ? solve_backward_common(out.paths, ctx.common_paths(), control, ctx.terms(), ctx.basis(), grid)
                       : solve_backward(out.paths, control, ctx.terms(), ctx.basis(), grid);

    out.residual = ControlGrid(control.n_paths(), grid.n_steps(), control.dim(), control.n_common());
    Matrix x;
    Matrix a;
    Vector p;
    for (std::size_t j = 0; j < grid.n_steps(); ++j) {
        for (std::size_t k = 0; k < control.n_common(); ++k) {
            x = out.paths.slice(j, k);
            a = control.slice(j, k);
            p = ctx.has_common() ? Vector(Eigen::Map<const Vector>(ctx.common_paths().point(k, j),
                                                                  static_cast<Eigen::Index>(ctx.common_paths().dim())))
                                 : Vector();
            const Matrix value = ctx.terms().residual(Cloud{x, a, p}, a);
            if (value.rows() != a.rows() || value.cols() != a.cols()) {
                throw std::invalid_argument("eval_v: residual field returned a slice of the wrong shape");
            }
            if (!value.allFinite()) {
                throw NumericalError("eval_v: residual field is non-finite at step " + std::to_string(j));
            }
            out.residual.slice(j, k) = value - out.backward.slice(j, k);
        }
    }
    return out;
}

ControlGrid eval_v(const OperatorContext& ctx, const ControlGrid& control) { return evaluate(ctx, control).residual; }

ControlGrid eval_v_mfgc(const OperatorContext& ctx, const ControlGrid& control) {
    if (!ctx.terms().from_mfgc) throw std::invalid_argument("eval_v_mfgc: context was not built from MFGC coefficients");
    return evaluate(ctx, control).residual;
}

ControlGrid eval_v_common(const OperatorContext& ctx, const ControlGrid& control) {
    if (!ctx.has_common()) throw std::invalid_argument("eval_v_common: context has no common noise");
    return evaluate(ctx, control).residual;
}

ResidualOperator as_operator(const OperatorContext& ctx) {
    return [&ctx](const ControlGrid& control) { return eval_v(ctx, control); };
}

Vector pointwise_inverse(const PointwiseMap& F, const Vector& x, const Vector& target, const Vector& initial,
                         const InverseOptions& options) {
    const Eigen::Index d = target.size();
    Vector u = initial.size() == d ? initial : Vector::Zero(d);
    Vector residual = F(x, u) - target;
    for (int iter = 0; iter < options.max_iterations && residual.lpNorm<Eigen::Infinity>() > options.tolerance;
         ++iter) {
        Eigen::MatrixXd jac(d, d);
        for (Eigen::Index c = 0; c < d; ++c) {
            const double h = options.fd_step * std::max(1.0, std::abs(u(c)));
            Vector up = u, um = u;
            up(c) += h;
            um(c) -= h;
            jac.col(c) = (F(x, up) - F(x, um)) / (2.0 * h);
        }
        const Vector step = jac.fullPivLu().solve(residual);
        if (!step.allFinite()) break;
        // Backtrack until the residual decreases.
        double damping = 1.0;
        Vector trial = u - step;
        Vector trial_residual = F(x, trial) - target;
        while (trial_residual.norm() >= residual.norm() && damping > 1e-6) {
            damping *= 0.5;
            trial = u - damping * step;
            trial_residual = F(x, trial) - target;
        }
        u = trial;
        residual = trial_residual;
    }
    if (!(residual.lpNorm<Eigen::Infinity>() <= options.tolerance)) {
        std::ostringstream msg;
        msg << "pointwise_inverse: no convergence at x = [" << x.transpose() << "], target = [" << target.transpose()
            << "], residual " << residual.lpNorm<Eigen::Infinity>();
        throw ConvergenceError(msg.str());
    }
    return u;
}

}  // namespace monofbsde
