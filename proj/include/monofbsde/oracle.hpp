#pragma once

#include "monofbsde/grid.hpp"
#include "monofbsde/problems.hpp"

#include <functional>
#include <vector>

namespace monofbsde {

/// Gauss-Hermite rule for a standard normal weight: E[h(Z)] ~ sum_i weights[i] h(nodes[i]).
struct GaussHermiteRule {
    Vector nodes;
    Vector weights;
};

/// Golub-Welsch on the probabilists' Hermite Jacobi matrix.
GaussHermiteRule gauss_hermite(int order);

/// eta(t) = b / (1 + a b (T - t)), the feedback slope for c = 0.
double eta(double t, double a, double b, double horizon);

/// Variance of the centered state X_t - E X_t for a deterministic X_0:
///   (2 sigma / ab) (phi(t) - phi(t)^2 / phi(0)),  phi(t) = 1 + a b (T - t).
double xbar_variance(double t, double a, double b, double sigma, double horizon);

/// E[f(Z)] for Z ~ N(0, variance).
double gaussian_expectation(const ScalarFunction& f, double variance, const GaussHermiteRule& rule);

/// (1 / phi(t)) int_t^T e(s) phi(s) ds with phi(s) = 1 + a b (T - s), by composite Simpson on
/// `intervals` panels of [t, T].
double theta_integral(const std::function<double(double)>& e, double t, double a, double b, double horizon,
                      int intervals = 2000);

/// Which lower limit the theta integral uses. `printed_typo` integrates from T - t and exists
/// only so the validation suite can show the ODE residual check catching it.
enum class ThetaLimit { consistent, printed_typo };

struct OracleOptions {
    int quadrature_order = 64;
    int theta_intervals = 2000;
    ThetaLimit theta_limit = ThetaLimit::consistent;
};

/// Closed-form / quadrature solution of the benchmark with c = 0 and X_0 = x0 deterministic:
/// U_t = eta(t) X_t + theta(t), where
///   theta(t) = (1 / phi(t)) int_t^T e(s) phi(s) ds,   e(t) = E[f(X_t - E X_t)].
class BenchmarkOracle {
public:
    explicit BenchmarkOracle(const BenchmarkParams& params, OracleOptions options = {});

    double eta(double t) const;
    double variance(double t) const;
    double e(double t) const;
    double theta(double t) const;

    const BenchmarkParams& params() const { return params_; }
    const OracleOptions& options() const { return options_; }

private:
    void check_time(double t) const;
    double phi(double t) const { return 1.0 + params_.a * params_.b * (params_.horizon - t); }
    double weighted_e(double s) const { return e(s) * phi(s); }
    /// int_s^T e(r) phi(r) dr.
    double tail_integral(double s) const;

    BenchmarkParams params_;
    OracleOptions options_;
    ScalarFunction f_;
    GaussHermiteRule rule_;
    double h_ = 0.0;
    std::vector<double> tail_;  // tail_integral at the table nodes k * h_
};

struct OdeResiduals {
    double eta = 0.0;             // max |eta' - a eta^2|, closed-form derivative
    double theta = 0.0;           // max |theta' - (a eta theta - e)|, five-point derivative
    double theta_terminal = 0.0;  // |theta(T)|
};

/// Residuals of eta' = a eta^2 and theta' = a eta theta - e on `points` uniform intervals of [0, T].
OdeResiduals oracle_ode_residuals(const BenchmarkOracle& oracle, int points = 2000);

struct FeedbackEstimate {
    Vector slope;      // eta_hat[j], j = 0..N_t
    Vector intercept;  // theta_hat[j]
    std::vector<bool> degenerate;
};

/// Per time step OLS of U[.][j] on X[.][j] (d = 1, pooled over common paths). A slice with no
/// X spread gives slope 0, intercept mean(U), and is flagged.
FeedbackEstimate extract_feedback(const PathGrid& paths, const BackwardGrid& backward);

}  // namespace monofbsde
