#include "monofbsde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace monofbsde {

Vector hermite_values(double z, int count) {
    Vector he(std::max(count, 0));
    if (count > 0) he(0) = 1.0;
    if (count > 1) he(1) = z;
    for (int n = 1; n + 1 < count; ++n) he(n + 1) = z * he(n) - n * he(n - 1);
    return he;
}

std::vector<std::vector<int>> basis_exponents(int n_active, const RegressionBasis& basis) {
    if (basis.n_functions < 1) throw std::invalid_argument("RegressionBasis: n_functions must be >= 1");
    std::vector<std::vector<int>> out;
    if (n_active == 0) {
        out.emplace_back();
        return out;
    }
    if (n_active == 1) {
        for (int deg = 0; deg < basis.n_functions; ++deg) out.push_back({deg});
        return out;
    }
    if (basis.max_total_degree < 0 || basis.max_features < 1) {
        throw std::invalid_argument("RegressionBasis: invalid tensor truncation");
    }
    // Graded order: total degree first, then lexicographic with the first coordinate fastest-growing.
    std::vector<int> current(n_active, 0);
    for (int total = 0; total <= basis.max_total_degree; ++total) {
        std::function<void(int, int)> place = [&](int coord, int remaining) {
            if (static_cast<int>(out.size()) >= basis.max_features) return;
            if (coord == n_active - 1) {
                current[coord] = remaining;
                out.push_back(current);
                return;
            }
            for (int deg = remaining; deg >= 0; --deg) {
                current[coord] = deg;
                place(coord + 1, remaining - deg);
            }
        };
        place(0, total);
    }
    return out;
}

Vector RegressionFit::features(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    const int n_active = static_cast<int>(active_.size());
    std::vector<Vector> per_coord(n_active);
    for (int a = 0; a < n_active; ++a) {
        const int c = active_[a];
        per_coord[a] = hermite_values((x(c) - center_(c)) / scale_(c), max_degree_ + 1);
    }
    Vector phi(n_features());
    for (int f = 0; f < n_features(); ++f) {
        double v = 1.0;
        for (int a = 0; a < n_active; ++a) v *= per_coord[a](exponents_[f][a]);
        phi(f) = v;
    }
    return phi;
}

Matrix RegressionFit::design(const Matrix& regressors) const {
    if (regressors.cols() != center_.size()) throw std::invalid_argument("RegressionFit: regressor width mismatch");
    const Eigen::Index n = regressors.rows();
    Matrix phi(n, n_features());
    if (active_.size() == 1) {
        // Fast path: straight recurrence into the row.
        const int c = active_[0];
        const int count = n_features();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = (regressors(i, c) - center_(c)) / scale_(c);
            double* row = phi.row(i).data();
            row[0] = 1.0;
            if (count > 1) row[1] = z;
            for (int m = 1; m + 1 < count; ++m) row[m + 1] = z * row[m] - m * row[m - 1];
        }
        return phi;
    }
    for (Eigen::Index i = 0; i < n; ++i) phi.row(i) = features(regressors.row(i)).transpose();
    return phi;
}

Matrix RegressionFit::predict(const Matrix& regressors) const { return design(regressors) * coefficients_; }

RegressionFit fit_conditional_expectation(const Matrix& targets, const Matrix& regressors,
                                          const RegressionBasis& basis) {
    const Eigen::Index n = regressors.rows();
    const Eigen::Index r = regressors.cols();
    if (targets.rows() != n) throw std::invalid_argument("fit_conditional_expectation: row count mismatch");
    if (n == 0 || r == 0) throw std::invalid_argument("fit_conditional_expectation: empty sample");
    if (!targets.allFinite()) throw std::invalid_argument("fit_conditional_expectation: non-finite targets");

    RegressionFit fit;
    // Plain loops: the summation order must not depend on how many columns sit beside this one.
    fit.center_ = Vector::Zero(r);
    fit.scale_ = Vector::Ones(r);
    for (Eigen::Index c = 0; c < r; ++c) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) sum += regressors(i, c);
        fit.center_(c) = sum / static_cast<double>(n);
        double sq = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dev = regressors(i, c) - fit.center_(c);
            sq += dev * dev;
        }
        const double sd = std::sqrt(sq / static_cast<double>(n));
        if (sd > 1e-12 * std::max(1.0, std::abs(fit.center_(c)))) {
            fit.scale_(c) = sd;
            fit.active_.push_back(static_cast<int>(c));
        }
    }
    fit.exponents_ = basis_exponents(static_cast<int>(fit.active_.size()), basis);
    for (const auto& e : fit.exponents_) {
        for (int deg : e) fit.max_degree_ = std::max(fit.max_degree_, deg);
    }
    const int k = fit.n_features();
    if (n < k) throw std::invalid_argument("fit_conditional_expectation: fewer samples than basis functions");

    const Matrix phi = fit.design(regressors);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    if (qr.rank() == k) {
        fit.coefficients_ = qr.solve(Eigen::MatrixXd(targets));
    } else {
        const Eigen::MatrixXd gram = phi.transpose() * phi;
        fit.ridge_lambda_ = 1e-10 * gram.trace() / k;
        fit.used_ridge_ = true;
        Eigen::MatrixXd shifted = gram;
        shifted.diagonal().array() += fit.ridge_lambda_;
        fit.coefficients_ = shifted.ldlt().solve(phi.transpose() * targets);
    }
    fit.fitted_ = phi * fit.coefficients_;
    if (!fit.coefficients_.allFinite()) throw std::runtime_error("fit_conditional_expectation: non-finite coefficients");
    return fit;
}

}  // namespace monofbsde
