#pragma once

#include "monofbsde/grid.hpp"
#include "monofbsde/noise_bank.hpp"

#include <functional>

namespace monofbsde {

/// Common-noise drift b: R^d0 -> R^d0.
using CommonDrift = std::function<Vector(const Vector&)>;

/// Euler scheme X[j+1] = X[j] - dt * alpha[j] + sqrt(2 sigma) * G[j], X[0] = x0.
/// A control with n_common() > 1 yields one forward cloud per common path, all driven by
/// the same idiosyncratic increments.
PathGrid simulate_forward(const ControlGrid& control, const NoiseBank& bank, const TimeGrid& grid, double sigma);

/// p[j+1] = p[j] - dt * b(p[j]) + sqrt(2 sigma0) * G0[j]. Result is indexed [k][j].
ProcessGrid<double> simulate_common(const NoiseBank& bank, const CommonDrift& drift, const TimeGrid& grid,
                                    double sigma0);

/// Feedback law evaluated on a whole time slice: (t, states n_paths x d, common state) -> controls.
using Feedback = std::function<Matrix(double t, const Matrix& x, const Vector& p)>;

struct FeedbackRun {
    ControlGrid control;
    PathGrid paths;
};

/// Builds an adapted control by applying `law` to the current state at every step.
/// `common` (indexed [k][j]) is required when n_common > 1 or the law reads p.
FeedbackRun simulate_feedback(const Feedback& law, const NoiseBank& bank, const TimeGrid& grid, double sigma,
                              std::size_t n_common = 1, const ProcessGrid<double>* common = nullptr);

}  // namespace monofbsde
