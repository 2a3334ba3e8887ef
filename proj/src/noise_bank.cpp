#include "monofbsde/noise_bank.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace monofbsde {

namespace {

void fill_initial(Matrix& out, const InitialLaw& law, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index c = 0; c < out.cols(); ++c) {
            out(i, c) = law.mean(c);
            if (law.stddev > 0.0) out(i, c) += law.stddev * normal(rng);
        }
    }
}

void fill_increments(ProcessGrid<double>& g, double dt, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    for (double& v : g.flat()) v = normal(rng);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

void write_row(std::ostream& out, const double* values, std::size_t n) {
    for (std::size_t m = 0; m < n; ++m) {
        if (m) out << ',';
        out << values[m];
    }
    out << '\n';
}

void read_row(std::istream& in, double* values, std::size_t n, const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(std::string("noise bank: truncated ") + what);
    const auto cells = split_csv(line);
    if (cells.size() != n) throw std::runtime_error(std::string("noise bank: wrong row width in ") + what);
    for (std::size_t m = 0; m < n; ++m) values[m] = std::stod(cells[m]);
}

}  // namespace

NoiseBank generate_noise_bank(std::uint64_t seed, std::size_t n_paths, const TimeGrid& grid, const InitialLaw& x0_law,
                              const std::optional<CommonNoiseSpec>& common) {
    const std::size_t dim = static_cast<std::size_t>(x0_law.mean.size());
    if (n_paths == 0 || dim == 0) throw std::invalid_argument("generate_noise_bank: dimensions must be positive");
    if (x0_law.stddev < 0.0) throw std::invalid_argument("generate_noise_bank: negative initial stddev");

    NoiseBank bank;
    bank.seed = seed;
    bank.n_paths = n_paths;
    bank.n_steps = grid.n_steps();
    bank.dim = dim;

    std::mt19937_64 rng(seed);
    bank.x0 = Matrix(n_paths, dim);
    fill_initial(bank.x0, x0_law, rng);
    bank.g = ProcessGrid<double>(n_paths, grid.n_steps(), dim);
    fill_increments(bank.g, grid.dt(), rng);

    if (common) {
        const auto d0 = static_cast<std::size_t>(common->p0.mean.size());
        if (common->n_common == 0 || d0 == 0) {
            throw std::invalid_argument("generate_noise_bank: common-noise dimensions must be positive");
        }
        // Separate stream so the idiosyncratic bank does not depend on the common spec.
        std::mt19937_64 rng0(seed ^ 0x9e3779b97f4a7c15ULL);
        bank.n_common = common->n_common;
        bank.common_dim = d0;
        bank.p0 = Matrix(common->n_common, d0);
        fill_initial(bank.p0, common->p0, rng0);
        bank.g0 = ProcessGrid<double>(common->n_common, grid.n_steps(), d0);
        fill_increments(bank.g0, grid.dt(), rng0);
    }
    return bank;
}

void write_noise_bank(std::ostream& out, const NoiseBank& bank) {
    const auto old_precision = out.precision(17);
    out << bank.seed << ',' << bank.n_paths << ',' << bank.n_steps << ',' << bank.dim;
    if (bank.has_common()) out << ',' << bank.n_common << ',' << bank.common_dim;
    out << '\n';
    for (std::size_t i = 0; i < bank.n_paths; ++i) write_row(out, bank.x0.row(i).data(), bank.dim);
    for (std::size_t i = 0; i < bank.n_paths; ++i) write_row(out, bank.g.point(i, 0), bank.n_steps * bank.dim);
    if (bank.has_common()) {
        for (std::size_t k = 0; k < bank.n_common; ++k) write_row(out, bank.p0.row(k).data(), bank.common_dim);
        for (std::size_t k = 0; k < bank.n_common; ++k) {
            write_row(out, bank.g0.point(k, 0), bank.n_steps * bank.common_dim);
        }
    }
    out.precision(old_precision);
}

NoiseBank read_noise_bank(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("noise bank: missing header");
    const auto header = split_csv(line);
    if (header.size() != 4 && header.size() != 6) throw std::runtime_error("noise bank: malformed header");

    NoiseBank bank;
    bank.seed = std::stoull(header[0]);
    bank.n_paths = std::stoull(header[1]);
    bank.n_steps = std::stoull(header[2]);
    bank.dim = std::stoull(header[3]);
    bank.x0 = Matrix(bank.n_paths, bank.dim);
    bank.g = ProcessGrid<double>(bank.n_paths, bank.n_steps, bank.dim);
    for (std::size_t i = 0; i < bank.n_paths; ++i) read_row(in, bank.x0.row(i).data(), bank.dim, "x0");
    for (std::size_t i = 0; i < bank.n_paths; ++i) read_row(in, bank.g.point(i, 0), bank.n_steps * bank.dim, "g");
    if (header.size() == 6) {
        bank.n_common = std::stoull(header[4]);
        bank.common_dim = std::stoull(header[5]);
        bank.p0 = Matrix(bank.n_common, bank.common_dim);
        bank.g0 = ProcessGrid<double>(bank.n_common, bank.n_steps, bank.common_dim);
        for (std::size_t k = 0; k < bank.n_common; ++k) read_row(in, bank.p0.row(k).data(), bank.common_dim, "p0");
        for (std::size_t k = 0; k < bank.n_common; ++k) {
            read_row(in, bank.g0.point(k, 0), bank.n_steps * bank.common_dim, "g0");
        }
    }
    return bank;
}

}  // namespace monofbsde
