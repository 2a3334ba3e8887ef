#pragma once

#include "monofbsde/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace monofbsde {

/// Law of an initial condition: a point mass when stddev is zero, otherwise an
/// independent Gaussian per coordinate.
struct InitialLaw {
    Vector mean;
    double stddev = 0.0;

    static InitialLaw dirac(Vector point) { return {std::move(point), 0.0}; }
    static InitialLaw dirac(double point) { return {Vector::Constant(1, point), 0.0}; }
};

struct CommonNoiseSpec {
    std::size_t n_common = 1;  // N_0
    InitialLaw p0;             // dimension d0 = p0.mean.size()
};

/// Frozen random inputs for a whole solve: initial samples, idiosyncratic increments and
/// optional common-noise increments. Increments already have variance dt per coordinate.
struct NoiseBank {
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::size_t dim = 0;
    Matrix x0;                    // n_paths x dim
    ProcessGrid<double> g;        // [n_paths][n_steps] of R^dim

    // Common noise (absent when n_common == 0).
    std::size_t n_common = 0;
    std::size_t common_dim = 0;
    Matrix p0;                    // n_common x common_dim
    ProcessGrid<double> g0;       // [n_common][n_steps] of R^common_dim

    bool has_common() const { return n_common > 0; }
    bool operator==(const NoiseBank&) const = default;
};

NoiseBank generate_noise_bank(std::uint64_t seed, std::size_t n_paths, const TimeGrid& grid, const InitialLaw& x0_law,
                              const std::optional<CommonNoiseSpec>& common = std::nullopt);

/// Text dump: header line `seed,N_p,N_t,d[,N_0,d0]`, then x0 rows, increment rows (one
/// path per line, N_t*d values), then p0 rows and common increment rows when present.
/// Values are written with 17 significant digits so the round trip is exact.
void write_noise_bank(std::ostream& out, const NoiseBank& bank);
NoiseBank read_noise_bank(std::istream& in);

}  // namespace monofbsde
