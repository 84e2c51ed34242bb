#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace lcpt::cli {

/// Numeric table with '#' metadata lines; numbers use 17 significant digits.
struct Table
{
    std::vector<std::string> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void write(std::ostream& out) const;
    void write(const std::filesystem::path& path) const;
};

std::string format_number(double x);

} // namespace lcpt::cli
