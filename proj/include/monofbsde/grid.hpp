#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace monofbsde {

/// Particle-major matrix: one row per simulated path, one column per state coordinate.
template <typename Scalar>
using SampleMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = SampleMatrix<double>;
using Vector = Eigen::VectorXd;

/// Uniform time grid on [0, T].
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
        }
        if (n_steps < 1) {
            throw std::invalid_argument("TimeGrid: n_steps must be at least 1");
        }
        dt_ = horizon_ / static_cast<double>(n_steps_);
    }

    double horizon() const { return horizon_; }
    std::size_t n_steps() const { return n_steps_; }
    double dt() const { return dt_; }
    double time(std::size_t j) const { return j == n_steps_ ? horizon_ : static_cast<double>(j) * dt_; }

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    std::size_t n_steps_;
    double dt_;
};

/// Dense array indexed [path][time][common path][coordinate], stored in that order so a
/// whole path is contiguous. Plain (no common noise) grids have n_common() == 1.
template <typename Scalar>
class ProcessGrid {
public:
    using SliceMap = Eigen::Map<SampleMatrix<Scalar>, 0, Eigen::OuterStride<>>;
    using ConstSliceMap = Eigen::Map<const SampleMatrix<Scalar>, 0, Eigen::OuterStride<>>;

    ProcessGrid() = default;

    ProcessGrid(std::size_t n_paths, std::size_t n_times, std::size_t dim, std::size_t n_common = 1,
                Scalar fill = Scalar(0))
        : n_paths_(n_paths), n_times_(n_times), n_common_(n_common), dim_(dim),
          data_(n_paths * n_times * n_common * dim, fill) {
        if (n_paths == 0 || n_times == 0 || n_common == 0 || dim == 0) {
            throw std::invalid_argument("ProcessGrid: all dimensions must be positive");
        }
    }

    std::size_t n_paths() const { return n_paths_; }
    std::size_t n_times() const { return n_times_; }
    std::size_t n_common() const { return n_common_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return data_.size(); }

    Scalar& operator()(std::size_t i, std::size_t j, std::size_t c = 0) { return data_[offset(i, j, 0) + c]; }
    Scalar operator()(std::size_t i, std::size_t j, std::size_t c = 0) const { return data_[offset(i, j, 0) + c]; }

    Scalar& at(std::size_t i, std::size_t j, std::size_t k, std::size_t c) { return data_[offset(i, j, k) + c]; }
    Scalar at(std::size_t i, std::size_t j, std::size_t k, std::size_t c) const { return data_[offset(i, j, k) + c]; }

    Scalar* point(std::size_t i, std::size_t j, std::size_t k = 0) { return data_.data() + offset(i, j, k); }
    const Scalar* point(std::size_t i, std::size_t j, std::size_t k = 0) const { return data_.data() + offset(i, j, k); }

    /// Strided view of the cloud {x[i][j][k]}_i as an n_paths x dim matrix.
    SliceMap slice(std::size_t j, std::size_t k = 0) {
        return SliceMap(point(0, j, k), static_cast<Eigen::Index>(n_paths_), static_cast<Eigen::Index>(dim_),
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(row_stride())));
    }
    ConstSliceMap slice(std::size_t j, std::size_t k = 0) const {
        return ConstSliceMap(point(0, j, k), static_cast<Eigen::Index>(n_paths_), static_cast<Eigen::Index>(dim_),
                             Eigen::OuterStride<>(static_cast<Eigen::Index>(row_stride())));
    }

    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> flat() {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }
    Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> flat() const {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }

    const std::vector<Scalar>& values() const { return data_; }

    bool same_shape(const ProcessGrid& other) const {
        return n_paths_ == other.n_paths_ && n_times_ == other.n_times_ && n_common_ == other.n_common_ &&
               dim_ == other.dim_;
    }

    bool all_finite() const {
        for (Scalar v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    bool operator==(const ProcessGrid&) const = default;

    ProcessGrid& operator+=(const ProcessGrid& rhs) {
        require_same_shape(rhs, "operator+=");
        flat() += rhs.flat();
        return *this;
    }
    ProcessGrid& operator-=(const ProcessGrid& rhs) {
        require_same_shape(rhs, "operator-=");
        flat() -= rhs.flat();
        return *this;
    }
    ProcessGrid& operator*=(Scalar s) {
        flat() *= s;
        return *this;
    }

    friend ProcessGrid operator+(ProcessGrid lhs, const ProcessGrid& rhs) { return lhs += rhs; }
    friend ProcessGrid operator-(ProcessGrid lhs, const ProcessGrid& rhs) { return lhs -= rhs; }
    friend ProcessGrid operator*(Scalar s, ProcessGrid g) { return g *= s; }

    void require_same_shape(const ProcessGrid& other, const char* what) const {
        if (!same_shape(other)) {
            throw std::invalid_argument(std::string("ProcessGrid shape mismatch in ") + what);
        }
    }

private:
    std::size_t row_stride() const { return n_times_ * n_common_ * dim_; }
    std::size_t offset(std::size_t i, std::size_t j, std::size_t k) const {
        return ((i * n_times_ + j) * n_common_ + k) * dim_;
    }

    std::size_t n_paths_ = 0;
    std::size_t n_times_ = 0;
    std::size_t n_common_ = 0;
    std::size_t dim_ = 0;
    std::vector<Scalar> data_;
};

/// Controls alpha[i][j] for j = 0..N_t-1; step j -> j+1 consumes alpha[i][j].
using ControlGrid = ProcessGrid<double>;
/// Forward states X[i][j], j = 0..N_t.
using PathGrid = ProcessGrid<double>;
/// Backward values U[i][j], j = 0..N_t.
using BackwardGrid = ProcessGrid<double>;

inline ControlGrid make_control(std::size_t n_paths, const TimeGrid& grid, std::size_t dim, std::size_t n_common = 1,
                                double fill = 0.0) {
    return ControlGrid(n_paths, grid.n_steps(), dim, n_common, fill);
}

/// Discrete L2(dt x P) inner product over the first N_t time indices. The sample average
/// runs over both the idiosyncratic and the common-noise axes.
template <typename Scalar>
Scalar inner_T(const ProcessGrid<Scalar>& a, const ProcessGrid<Scalar>& b, const TimeGrid& grid) {
    a.require_same_shape(b, "inner_T");
    if (a.n_times() != grid.n_steps() && a.n_times() != grid.n_steps() + 1) {
        throw std::invalid_argument("inner_T: grid time axis does not match the TimeGrid");
    }
    const std::size_t per_time = a.n_common() * a.dim();
    Scalar sum(0);
    for (std::size_t i = 0; i < a.n_paths(); ++i) {
        const Scalar* pa = a.point(i, 0);
        const Scalar* pb = b.point(i, 0);
        for (std::size_t m = 0; m < grid.n_steps() * per_time; ++m) sum += pa[m] * pb[m];
    }
    const Scalar weight = Scalar(grid.dt()) / Scalar(a.n_paths() * a.n_common());
    return weight * sum;
}

template <typename Scalar>
Scalar norm_T(const ProcessGrid<Scalar>& a, const TimeGrid& grid) {
    using std::sqrt;
    return sqrt(inner_T(a, a, grid));
}

}  // namespace monofbsde
