#include "monofbsde/backward.hpp"

#include "monofbsde/errors.hpp"

#include <string>

namespace monofbsde {

namespace {

void require_finite(const Matrix& values, std::size_t j, std::size_t k, const char* what) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        if (!values.row(i).allFinite()) {
            throw NumericalError(std::string(what) + " returned a non-finite value at path " + std::to_string(i) +
                                 ", step " + std::to_string(j) + ", common path " + std::to_string(k));
        }
    }
}

void require_shape(const Matrix& values, const Matrix& like, std::size_t j, const char* what) {
    if (values.rows() != like.rows() || values.cols() != like.cols()) {
        throw std::invalid_argument(std::string(what) + " returned a slice of the wrong shape at step " +
                                    std::to_string(j));
    }
}

Vector common_state(const ProcessGrid<double>* common, std::size_t k, std::size_t j) {
    if (!common) return Vector();
    return Eigen::Map<const Vector>(common->point(k, j), static_cast<Eigen::Index>(common->dim()));
}

BackwardGrid sweep(const PathGrid& paths, const ProcessGrid<double>* common, const ControlGrid& control,
                   const OperatorTerms& terms, const RegressionBasis& basis, const TimeGrid& grid) {
    const std::size_t n_t = grid.n_steps();
    const std::size_t n_p = control.n_paths();
    const std::size_t n_0 = control.n_common();
    const std::size_t d = control.dim();
    if (control.n_times() != n_t || paths.n_times() != n_t + 1 || paths.n_paths() != n_p ||
        paths.n_common() != n_0 || paths.dim() != d) {
        throw std::invalid_argument("solve_backward: paths and control shapes are inconsistent");
    }
    if (common && (common->n_paths() != n_0 || common->n_times() != n_t + 1)) {
        throw std::invalid_argument("solve_backward_common: common paths do not match the control");
    }
    const std::size_t d0 = common ? common->dim() : 0;
    const auto rows = static_cast<Eigen::Index>(n_p);

    BackwardGrid u(n_p, n_t + 1, d, n_0);
    Matrix x(n_p, d);
    Matrix a(n_p, d);
    Vector p;

    for (std::size_t k = 0; k < n_0; ++k) {
        x = paths.slice(n_t, k);
        a = control.slice(n_t - 1, k);
        p = common_state(common, k, n_t);
        const Matrix terminal = terms.terminal(Cloud{x, a, p});
        require_shape(terminal, x, n_t, "terminal field");
        require_finite(terminal, n_t, k, "terminal field");
        u.slice(n_t, k) = terminal;
    }

    Matrix targets(rows * static_cast<Eigen::Index>(n_0), static_cast<Eigen::Index>(d));
    Matrix regressors(rows * static_cast<Eigen::Index>(n_0), static_cast<Eigen::Index>(d + d0));
    for (std::size_t step = n_t; step-- > 0;) {
        const std::size_t next = step + 1;
        const std::size_t next_control = next < n_t ? next : n_t - 1;
        for (std::size_t k = 0; k < n_0; ++k) {
            const auto block = static_cast<Eigen::Index>(k) * rows;
            x = paths.slice(next, k);
            a = control.slice(next_control, k);
            p = common_state(common, k, next);
            const Matrix drive = terms.driver(Cloud{x, a, p}, a);
            require_shape(drive, x, next, "driver");
            require_finite(drive, next, k, "driver");
            targets.middleRows(block, rows) = u.slice(next, k) + grid.dt() * drive;

            regressors.block(block, 0, rows, static_cast<Eigen::Index>(d)) = paths.slice(step, k);
            if (common) {
                const Vector p_now = common_state(common, k, step);
                regressors.block(block, static_cast<Eigen::Index>(d), rows, static_cast<Eigen::Index>(d0))
                    .rowwise() = p_now.transpose();
            }
        }
        const RegressionFit fit = fit_conditional_expectation(targets, regressors, basis);
        for (std::size_t k = 0; k < n_0; ++k) {
            u.slice(step, k) = fit.fitted().middleRows(static_cast<Eigen::Index>(k) * rows, rows);
        }
    }
    return u;
}

}  // namespace

OperatorTerms terms_from(const ProblemCoefficients& coeffs) {
    if (!coeffs.drift_inverse || !coeffs.driver || !coeffs.terminal) {
        throw std::invalid_argument("terms_from: coefficient set '" + coeffs.name + "' is incomplete");
    }
    OperatorTerms terms;
    terms.name = coeffs.name;
    terms.dim = coeffs.dim;
    terms.residual = coeffs.drift_inverse;
    terms.driver = [inverse = coeffs.drift_inverse, driver = coeffs.driver](const Cloud& cloud, const Matrix& alpha) {
        return driver(cloud, inverse(cloud, alpha));
    };
    terms.terminal = coeffs.terminal;
    return terms;
}

OperatorTerms terms_from(const MfgcCoefficients& coeffs) {
    if (!coeffs.grad_alpha_L || !coeffs.grad_x_L || !coeffs.grad_x_g) {
        throw std::invalid_argument("terms_from: MFGC coefficient set '" + coeffs.name + "' is incomplete");
    }
    return OperatorTerms{coeffs.name, coeffs.dim, coeffs.grad_alpha_L, coeffs.grad_x_L, coeffs.grad_x_g, true};
}

BackwardGrid solve_backward(const PathGrid& paths, const ControlGrid& control, const OperatorTerms& terms,
                            const RegressionBasis& basis, const TimeGrid& grid) {
    if (control.n_common() != 1) throw std::invalid_argument("solve_backward: use solve_backward_common");
    return sweep(paths, nullptr, control, terms, basis, grid);
}

BackwardGrid solve_backward_common(const PathGrid& paths, const ProcessGrid<double>& common_paths,
                                   const ControlGrid& control, const OperatorTerms& terms,
                                   const RegressionBasis& basis, const TimeGrid& grid) {
    return sweep(paths, &common_paths, control, terms, basis, grid);
}

}  // namespace monofbsde
