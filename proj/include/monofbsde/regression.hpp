#pragma once

#include "monofbsde/grid.hpp"

#include <vector>

namespace monofbsde {

enum class BasisFamily { probabilists_hermite };

/// Polynomial feature family used for conditional expectations.
///
/// A regressor coordinate whose sample spread vanishes is dropped from the basis. With one
/// active coordinate the features are He_0..He_{K-1} of the standardized input; with several,
/// tensor products of total degree <= max_total_degree, truncated to max_features; with none,
/// only the constant remains and the fit is the sample mean.
struct RegressionBasis {
    BasisFamily family = BasisFamily::probabilists_hermite;
    int n_functions = 10;
    int max_total_degree = 4;
    int max_features = 35;
};

/// Probabilists' Hermite polynomials He_0..He_{count-1} at z.
Vector hermite_values(double z, int count);

/// Least-squares projection onto the span of the basis, together with the affine
/// standardization it was fitted under.
class RegressionFit {
public:
    /// Feature vector of a raw (unstandardized) regressor point; the first entry is 1.
    Vector features(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    Matrix design(const Matrix& regressors) const;
    Matrix predict(const Matrix& regressors) const;

    const Matrix& coefficients() const { return coefficients_; }  // n_features x d_out
    const Matrix& fitted() const { return fitted_; }
    const Vector& center() const { return center_; }
    const Vector& scale() const { return scale_; }
    const std::vector<std::vector<int>>& exponents() const { return exponents_; }
    const std::vector<int>& active() const { return active_; }
    int n_features() const { return static_cast<int>(exponents_.size()); }
    bool used_ridge() const { return used_ridge_; }
    double ridge_lambda() const { return ridge_lambda_; }

private:
    friend RegressionFit fit_conditional_expectation(const Matrix&, const Matrix&, const RegressionBasis&);

    Vector center_;
    Vector scale_;
    std::vector<int> active_;                    // indices of regressor coordinates kept
    std::vector<std::vector<int>> exponents_;    // per feature, one degree per active coordinate
    int max_degree_ = 0;
    Matrix coefficients_;
    Matrix fitted_;
    bool used_ridge_ = false;
    double ridge_lambda_ = 0.0;
};

/// Multi-indices for `n_active` coordinates following the truncation rule above.
std::vector<std::vector<int>> basis_exponents(int n_active, const RegressionBasis& basis);

/// Regresses each target column on the basis evaluated at the regressors (rows are samples).
/// A rank-deficient design falls back to ridge with lambda = 1e-10 * trace(A^T A) / K.
RegressionFit fit_conditional_expectation(const Matrix& targets, const Matrix& regressors,
                                          const RegressionBasis& basis);

}  // namespace monofbsde
