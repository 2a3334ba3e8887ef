#include "monofbsde/regression.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace monofbsde;

namespace {

Matrix normal_column(std::mt19937_64& rng, Eigen::Index n, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> normal(mean, sd);
    Matrix x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = normal(rng);
    return x;
}

}  // namespace

TEST_SUITE("regression") {

TEST_CASE("hermite recurrence values") {
    CHECK(hermite_values(3.7, 1)(0) == 1.0);
    CHECK(hermite_values(0.0, 2)(1) == 0.0);
    const Vector he = hermite_values(2.0, 10);
    CHECK(he(2) == 3.0);
    CHECK(he(3) == 2.0);                 // z^3 - 3z
    CHECK(he(4) == -5.0);                // z^4 - 6z^2 + 3
    CHECK(he(9) == doctest::Approx(512.0 - 36.0 * 128.0 + 378.0 * 32.0 - 1260.0 * 8.0 + 945.0 * 2.0));
}

TEST_CASE("basis sizes") {
    RegressionBasis basis;
    CHECK(basis_exponents(0, basis).size() == 1);
    CHECK(basis_exponents(1, basis).size() == 10);
    CHECK(basis_exponents(2, basis).size() == 15);
    CHECK(basis_exponents(3, basis).size() == 35);
    CHECK(basis_exponents(4, basis).size() == 35);
    for (const auto& e : basis_exponents(3, basis)) {
        int total = 0;
        for (int d : e) total += d;
        CHECK(total <= 4);
    }
    CHECK(basis_exponents(2, basis).front() == std::vector<int>{0, 0});
}

TEST_CASE("targets in the span are reproduced") {
    std::mt19937_64 rng(1);
    const Matrix x = normal_column(rng, 500, 4.0, 3.0);
    const Matrix y = 2.0 * x;
    const auto fit = fit_conditional_expectation(y, x, RegressionBasis{});
    CHECK((fit.fitted() - y).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((fit.predict(x) - y).cwiseAbs().maxCoeff() <= 1e-10);

    const Matrix c = Matrix::Constant(500, 1, -1.25);
    const auto cfit = fit_conditional_expectation(c, x, RegressionBasis{});
    CHECK((cfit.fitted().array() + 1.25).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("quadratic target recovers the Hermite pattern within three standard errors") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    const Eigen::Index n = 100000;
    Matrix x(n, 1), y(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = normal(rng);
        y(i, 0) = x(i, 0) * x(i, 0) + normal(rng);
    }
    const auto fit = fit_conditional_expectation(y, x, RegressionBasis{});
    // x = m + s z  =>  x^2 = (m^2 + s^2) He0(z) + 2 m s He1(z) + s^2 He2(z)
    const double m = fit.center()(0), s = fit.scale()(0);
    Vector oracle = Vector::Zero(10);
    oracle(0) = m * m + s * s;
    oracle(1) = 2.0 * m * s;
    oracle(2) = s * s;

    const Matrix phi = fit.design(x);
    const double resid_var = (y - fit.fitted()).squaredNorm() / static_cast<double>(n - 10);
    const Eigen::MatrixXd cov = resid_var * (phi.transpose() * phi).inverse();
    for (int k = 0; k < 10; ++k) {
        const double se = std::sqrt(cov(k, k));
        CHECK(std::abs(fit.coefficients()(k, 0) - oracle(k)) <= 3.0 * se);
    }
    CHECK(fit.coefficients()(0, 0) == doctest::Approx(1.0).epsilon(0.03));
    CHECK(fit.coefficients()(2, 0) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("projection is idempotent and residuals are orthogonal") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    const Matrix x = normal_column(rng, 3000, 1.0, 2.0);
    Matrix y(3000, 2);
    for (Eigen::Index i = 0; i < 3000; ++i) {
        y(i, 0) = std::atan(x(i, 0)) + normal(rng);
        y(i, 1) = std::exp(-x(i, 0) * x(i, 0)) + 0.1 * normal(rng);
    }
    const auto fit = fit_conditional_expectation(y, x, RegressionBasis{});
    const auto refit = fit_conditional_expectation(fit.fitted(), x, RegressionBasis{});
    CHECK((refit.coefficients() - fit.coefficients()).cwiseAbs().maxCoeff() <= 1e-10);

    const Matrix phi = fit.design(x);
    const Matrix cross = phi.transpose() * (y - fit.fitted());
    const double scale = phi.norm() * y.norm();
    CHECK(cross.cwiseAbs().maxCoeff() <= 1e-8 * scale);
}

TEST_CASE("affine change of regressor leaves fitted values unchanged") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> normal;
    const Matrix x = normal_column(rng, 2000);
    Matrix y(2000, 1);
    for (Eigen::Index i = 0; i < 2000; ++i) y(i, 0) = std::sin(2.0 * x(i, 0)) + normal(rng);
    const Matrix shifted = (3.0 * x.array() + 5.0).matrix();
    const auto a = fit_conditional_expectation(y, x, RegressionBasis{});
    const auto b = fit_conditional_expectation(y, shifted, RegressionBasis{});
    CHECK((a.fitted() - b.fitted()).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("degenerate regressor returns the sample mean") {
    std::mt19937_64 rng(7);
    const Matrix x = Matrix::Constant(400, 1, 1.0);
    const Matrix y = normal_column(rng, 400, 2.0, 1.0);
    const auto fit = fit_conditional_expectation(y, x, RegressionBasis{});
    CHECK(fit.active().empty());
    CHECK((fit.fitted().array() - y.mean()).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("constant extra column is ignored") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    const Matrix x = normal_column(rng, 1000);
    Matrix xp(1000, 2);
    xp.col(0) = x.col(0);
    xp.col(1).setConstant(0.3);
    Matrix y(1000, 1);
    for (Eigen::Index i = 0; i < 1000; ++i) y(i, 0) = std::tanh(x(i, 0)) + normal(rng);
    const auto plain = fit_conditional_expectation(y, x, RegressionBasis{});
    const auto padded = fit_conditional_expectation(y, xp, RegressionBasis{});
    CHECK(padded.active() == std::vector<int>{0});
    CHECK(padded.fitted() == plain.fitted());
}

TEST_CASE("two active regressors use the tensor basis") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> normal;
    Matrix x(2000, 2), y(2000, 1);
    for (Eigen::Index i = 0; i < 2000; ++i) {
        x(i, 0) = normal(rng);
        x(i, 1) = normal(rng);
        y(i, 0) = 1.0 + x(i, 0) * x(i, 1) - x(i, 1) * x(i, 1) * x(i, 0);
    }
    const auto fit = fit_conditional_expectation(y, x, RegressionBasis{});
    CHECK(fit.n_features() == 15);
    CHECK((fit.fitted() - y).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("rank deficient design falls back to ridge") {
    // Two distinct values only: a degree-9 polynomial basis is rank 2.
    Matrix x(200, 1), y(200, 1);
    for (Eigen::Index i = 0; i < 200; ++i) {
        x(i, 0) = i % 2 ? 1.0 : -1.0;
        y(i, 0) = i % 2 ? 4.0 : 2.0;
    }
    const auto fit = fit_conditional_expectation(y, x, RegressionBasis{});
    CHECK(fit.used_ridge());
    CHECK(fit.ridge_lambda() > 0.0);
    CHECK((fit.fitted() - y).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("too few samples are rejected") {
    std::mt19937_64 rng(1);
    const Matrix x = normal_column(rng, 5);
    CHECK_THROWS_AS(fit_conditional_expectation(x, x, RegressionBasis{}), std::invalid_argument);
}

}
