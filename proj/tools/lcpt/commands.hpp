#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"

namespace lcpt::cli {

/// A single-point run hit a degenerate configuration. Maps to exit code 3.
class degeneracy_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct Dataset
{
    std::string name; ///< file stem
    Table table;
    std::vector<std::string> warnings;
};

Dataset run_steady_scan(const RunConfig& rc, unsigned threads);
Dataset run_spectrum(const RunConfig& rc, unsigned threads);
Dataset run_chd(const RunConfig& rc, unsigned threads);
Dataset run_squeezing(const RunConfig& rc, unsigned threads);
Dataset run_variance_map(const RunConfig& rc, unsigned threads);

/// Dispatches on rc.command.
Dataset run_command(const RunConfig& rc, unsigned threads);

struct Preset
{
    std::string name;
    std::string description;
    std::vector<RunConfig> runs;
};

Preset load_preset(const std::filesystem::path& path,
                   std::optional<Units> units_override = std::nullopt);

/// figN.json files in `dir`, ordered by N.
std::vector<std::filesystem::path> list_presets(const std::filesystem::path& dir);

} // namespace lcpt::cli
