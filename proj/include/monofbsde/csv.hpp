#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace monofbsde {

/// Numeric table with a one-line header. Values are written with 17 significant digits.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

std::string format_double(double value);

}  // namespace monofbsde
