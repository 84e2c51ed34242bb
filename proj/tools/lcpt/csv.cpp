#include "csv.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace lcpt::cli {

std::string format_number(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    if (x == 0.0) {
        return "0"; // folds -0 into 0
    }
    return fmt::format("{:.17g}", x);
}

void Table::write(std::ostream& out) const
{
    for (const auto& m : metadata) {
        out << "# " << m << '\n';
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        out << (c ? "," : "") << columns[c];
    }
    out << '\n';
    std::string line;
    for (const auto& row : rows) {
        line.clear();
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) {
                line += ',';
            }
            line += format_number(row[c]);
        }
        out << line << '\n';
    }
}

void Table::write(const std::filesystem::path& path) const
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    write(out);
}

} // namespace lcpt::cli
