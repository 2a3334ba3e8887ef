#include "monofbsde/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace monofbsde {

namespace {

void check_bank(const NoiseBank& bank, const TimeGrid& grid, std::size_t n_paths, std::size_t dim) {
    if (bank.n_paths != n_paths || bank.dim != dim || bank.n_steps != grid.n_steps()) {
        throw std::invalid_argument("forward simulation: noise bank shape does not match the control");
    }
}

}  // namespace

PathGrid simulate_forward(const ControlGrid& control, const NoiseBank& bank, const TimeGrid& grid, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("simulate_forward: sigma must be nonnegative");
    if (control.n_times() != grid.n_steps()) throw std::invalid_argument("simulate_forward: control has wrong time axis");
    check_bank(bank, grid, control.n_paths(), control.dim());
    if (!control.all_finite()) throw std::invalid_argument("simulate_forward: control has non-finite entries");

    const std::size_t n_t = grid.n_steps();
    const std::size_t n_0 = control.n_common();
    const std::size_t d = control.dim();
    const double dt = grid.dt();
    const double vol = std::sqrt(2.0 * sigma);

    PathGrid x(control.n_paths(), n_t + 1, d, n_0);
    for (std::size_t i = 0; i < control.n_paths(); ++i) {
        for (std::size_t k = 0; k < n_0; ++k) {
            double* start = x.point(i, 0, k);
            for (std::size_t c = 0; c < d; ++c) start[c] = bank.x0(i, c);
        }
        for (std::size_t j = 0; j < n_t; ++j) {
            const double* noise = bank.g.point(i, j);
            for (std::size_t k = 0; k < n_0; ++k) {
                const double* cur = x.point(i, j, k);
                const double* a = control.point(i, j, k);
                double* next = x.point(i, j + 1, k);
                for (std::size_t c = 0; c < d; ++c) next[c] = cur[c] - dt * a[c] + vol * noise[c];
            }
        }
    }
    return x;
}

ProcessGrid<double> simulate_common(const NoiseBank& bank, const CommonDrift& drift, const TimeGrid& grid,
                                    double sigma0) {
    if (!bank.has_common()) throw std::invalid_argument("simulate_common: noise bank has no common component");
    if (!(sigma0 >= 0.0)) throw std::invalid_argument("simulate_common: sigma0 must be nonnegative");
    const std::size_t n_t = grid.n_steps();
    const std::size_t d0 = bank.common_dim;
    const double dt = grid.dt();
    const double vol = std::sqrt(2.0 * sigma0);

    ProcessGrid<double> p(bank.n_common, n_t + 1, d0);
    Vector state(d0);
    for (std::size_t k = 0; k < bank.n_common; ++k) {
        state = bank.p0.row(k).transpose();
        for (std::size_t c = 0; c < d0; ++c) p(k, 0, c) = state(c);
        for (std::size_t j = 0; j < n_t; ++j) {
            const Vector b = drift ? drift(state) : Vector::Zero(d0);
            if (b.size() != static_cast<Eigen::Index>(d0) || !b.allFinite()) {
                throw std::runtime_error("simulate_common: non-finite drift at common path " + std::to_string(k) +
                                         ", step " + std::to_string(j));
            }
            const double* noise = bank.g0.point(k, j);
            for (std::size_t c = 0; c < d0; ++c) {
                state(c) = state(c) - dt * b(c) + vol * noise[c];
                p(k, j + 1, c) = state(c);
            }
        }
    }
    return p;
}

FeedbackRun simulate_feedback(const Feedback& law, const NoiseBank& bank, const TimeGrid& grid, double sigma,
                              std::size_t n_common, const ProcessGrid<double>* common) {
    const std::size_t n_p = bank.n_paths;
    const std::size_t d = bank.dim;
    const std::size_t n_t = grid.n_steps();
    if (n_common > 1 && common == nullptr) throw std::invalid_argument("simulate_feedback: common paths required");
    if (common && common->n_paths() != n_common) throw std::invalid_argument("simulate_feedback: common path count");
    check_bank(bank, grid, n_p, d);

    const double dt = grid.dt();
    const double vol = std::sqrt(2.0 * sigma);
    FeedbackRun run{ControlGrid(n_p, n_t, d, n_common), PathGrid(n_p, n_t + 1, d, n_common)};
    for (std::size_t k = 0; k < n_common; ++k) {
        run.paths.slice(0, k) = bank.x0;
    }
    Matrix x(n_p, d);
    Vector p;
    for (std::size_t j = 0; j < n_t; ++j) {
        for (std::size_t k = 0; k < n_common; ++k) {
            x = run.paths.slice(j, k);
            p = common ? Vector(Eigen::Map<const Vector>(common->point(k, j), static_cast<Eigen::Index>(common->dim())))
                       : Vector();
            const Matrix a = law(grid.time(j), x, p);
            if (a.rows() != x.rows() || a.cols() != x.cols() || !a.allFinite()) {
                throw std::runtime_error("simulate_feedback: feedback law returned a bad slice at step " +
                                         std::to_string(j));
            }
            run.control.slice(j, k) = a;
            for (std::size_t i = 0; i < n_p; ++i) {
                const double* noise = bank.g.point(i, j);
                for (std::size_t c = 0; c < d; ++c) {
                    run.paths.at(i, j + 1, k, c) = x(i, c) - dt * a(i, c) + vol * noise[c];
                }
            }
        }
    }
    return run;
}

}  // namespace monofbsde
