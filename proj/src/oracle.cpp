#include "monofbsde/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace monofbsde {

GaussHermiteRule gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
        jacobi(k - 1, k) = jacobi(k, k - 1);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussHermiteRule rule;
    rule.nodes = eig.eigenvalues();
    rule.weights = eig.eigenvectors().row(0).transpose().array().square();
    rule.weights /= rule.weights.sum();
    return rule;
}

double eta(double t, double a, double b, double horizon) {
    if (t < 0.0 || t > horizon) throw std::invalid_argument("eta: t outside [0, T]");
    return b / (1.0 + a * b * (horizon - t));
}

double xbar_variance(double t, double a, double b, double sigma, double horizon) {
    if (t < 0.0 || t > horizon) throw std::invalid_argument("xbar_variance: t outside [0, T]");
    if (!(a * b > 0.0)) throw std::invalid_argument("xbar_variance: requires a * b > 0");
    const double phi_t = 1.0 + a * b * (horizon - t);
    const double phi_0 = 1.0 + a * b * horizon;
    return std::max(0.0, 2.0 * sigma / (a * b) * phi_t * (phi_0 - phi_t) / phi_0);
}

double gaussian_expectation(const ScalarFunction& f, double variance, const GaussHermiteRule& rule) {
    if (variance < 0.0) throw std::invalid_argument("gaussian_expectation: negative variance");
    const double sd = std::sqrt(variance);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) acc += rule.weights(i) * f(sd * rule.nodes(i));
    return acc;
}

double theta_integral(const std::function<double(double)>& e, double t, double a, double b, double horizon,
                      int intervals) {
    if (t < 0.0 || t > horizon) throw std::invalid_argument("theta_integral: t outside [0, T]");
    if (intervals < 1) throw std::invalid_argument("theta_integral: intervals must be >= 1");
    const auto phi = [&](double s) { return 1.0 + a * b * (horizon - s); };
    const double h = (horizon - t) / intervals;
    double acc = 0.0;
    for (int k = 0; k < intervals; ++k) {
        const double lo = t + k * h;
        const double hi = k + 1 == intervals ? horizon : lo + h;
        const double mid = 0.5 * (lo + hi);
        acc += (hi - lo) / 6.0 * (e(lo) * phi(lo) + 4.0 * e(mid) * phi(mid) + e(hi) * phi(hi));
    }
    return acc / phi(t);
}

BenchmarkOracle::BenchmarkOracle(const BenchmarkParams& params, OracleOptions options)
    : params_(params), options_(options), f_(scalar_function(params.f_name)),
      rule_(gauss_hermite(options.quadrature_order)) {
    if (params_.c != 0.0) throw std::invalid_argument("BenchmarkOracle: only c = 0 has a closed form");
    if (!(params_.a * params_.b > 0.0)) throw std::invalid_argument("BenchmarkOracle: requires a * b > 0");
    if (options_.theta_intervals < 1) throw std::invalid_argument("BenchmarkOracle: theta_intervals must be >= 1");

    // Composite Simpson per table interval, accumulated from T backwards.
    const int n = options_.theta_intervals;
    h_ = params_.horizon / n;
    tail_.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = n - 1; k >= 0; --k) {
        const double lo = k * h_;
        const double hi = k + 1 == n ? params_.horizon : (k + 1) * h_;
        const double simpson = (hi - lo) / 6.0 * (weighted_e(lo) + 4.0 * weighted_e(0.5 * (lo + hi)) + weighted_e(hi));
        tail_[static_cast<std::size_t>(k)] = tail_[static_cast<std::size_t>(k) + 1] + simpson;
    }
}

void BenchmarkOracle::check_time(double t) const {
    if (t < 0.0 || t > params_.horizon) throw std::invalid_argument("BenchmarkOracle: t outside [0, T]");
}

double BenchmarkOracle::eta(double t) const { return monofbsde::eta(t, params_.a, params_.b, params_.horizon); }

double BenchmarkOracle::variance(double t) const {
    return xbar_variance(t, params_.a, params_.b, params_.sigma, params_.horizon);
}

double BenchmarkOracle::e(double t) const {
    check_time(t);
    return gaussian_expectation(f_, variance(t), rule_);
}

double BenchmarkOracle::tail_integral(double s) const {
    if (s >= params_.horizon) return 0.0;
    const int n = options_.theta_intervals;
    const int k = std::min(static_cast<int>(std::floor(s / h_)), n - 1);
    const double hi = k + 1 == n ? params_.horizon : (k + 1) * h_;
    if (s == k * h_) return tail_[static_cast<std::size_t>(k)];
    const double partial = (hi - s) / 6.0 * (weighted_e(s) + 4.0 * weighted_e(0.5 * (s + hi)) + weighted_e(hi));
    return tail_[static_cast<std::size_t>(k) + 1] + partial;
}

double BenchmarkOracle::theta(double t) const {
    check_time(t);
    const double lower = options_.theta_limit == ThetaLimit::consistent ? t : params_.horizon - t;
    return tail_integral(lower) / phi(t);
}

OdeResiduals oracle_ode_residuals(const BenchmarkOracle& oracle, int points) {
    if (points < 8) throw std::invalid_argument("oracle_ode_residuals: need at least 8 intervals");
    const auto& p = oracle.params();
    const double h = p.horizon / points;
    OdeResiduals out;
    out.theta_terminal = std::abs(oracle.theta(p.horizon));
    for (int i = 0; i <= points; ++i) {
        const double t = i == points ? p.horizon : i * h;
        const double phi = 1.0 + p.a * p.b * (p.horizon - t);
        const double d_eta = p.a * p.b * p.b / (phi * phi);
        out.eta = std::max(out.eta, std::abs(d_eta - p.a * oracle.eta(t) * oracle.eta(t)));
        if (i < 2 || i > points - 2) continue;
        const double d_theta = (oracle.theta(t - 2 * h) - 8.0 * oracle.theta(t - h) + 8.0 * oracle.theta(t + h) -
                                oracle.theta(std::min(t + 2 * h, p.horizon))) /
                               (12.0 * h);
        const double rhs = p.a * oracle.eta(t) * oracle.theta(t) - oracle.e(t);
        out.theta = std::max(out.theta, std::abs(d_theta - rhs));
    }
    return out;
}

FeedbackEstimate extract_feedback(const PathGrid& paths, const BackwardGrid& backward) {
    if (!paths.same_shape(backward)) throw std::invalid_argument("extract_feedback: shape mismatch");
    if (paths.dim() != 1) throw std::invalid_argument("extract_feedback: only scalar states are supported");
    const std::size_t n_times = paths.n_times();
    const double n = static_cast<double>(paths.n_paths() * paths.n_common());

    FeedbackEstimate est{Vector(n_times), Vector(n_times), std::vector<bool>(n_times, false)};
    for (std::size_t j = 0; j < n_times; ++j) {
        double mx = 0.0, mu = 0.0;
        for (std::size_t i = 0; i < paths.n_paths(); ++i) {
            for (std::size_t k = 0; k < paths.n_common(); ++k) {
                mx += paths.at(i, j, k, 0);
                mu += backward.at(i, j, k, 0);
            }
        }
        mx /= n;
        mu /= n;
        double sxx = 0.0, sxu = 0.0;
        for (std::size_t i = 0; i < paths.n_paths(); ++i) {
            for (std::size_t k = 0; k < paths.n_common(); ++k) {
                const double dx = paths.at(i, j, k, 0) - mx;
                sxx += dx * dx;
                sxu += dx * (backward.at(i, j, k, 0) - mu);
            }
        }
        if (sxx <= 1e-24 * n * std::max(1.0, mx * mx)) {
            est.slope(j) = 0.0;
            est.intercept(j) = mu;
            est.degenerate[j] = true;
        } else {
            est.slope(j) = sxu / sxx;
            est.intercept(j) = mu - est.slope(j) * mx;
        }
    }
    return est;
}

}  // namespace monofbsde
