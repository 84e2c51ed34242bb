#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <lcpt/spectra.hpp>

namespace lcpt::cli {

/// Bad input; carries the file, the JSON path of the offending field and its
/// line when known. Maps to exit code 2.
class config_error : public std::runtime_error
{
public:
    config_error(const std::string& source, const std::string& field,
                 std::optional<std::size_t> line, const std::string& message);

    const std::string& field() const { return field_; }
    std::optional<std::size_t> line() const { return line_; }

private:
    std::string field_;
    std::optional<std::size_t> line_;
};

enum class Units { scaled, mhz };

Units parse_units(const std::string& text);
const char* to_string(Units u);

/// Rate fields of LambdaParams, in column order.
enum class Field { omega_a, omega_b, delta_a, delta_b, gamma_a, gamma_b };

inline constexpr std::array<Field, 6> all_fields{
    Field::omega_a, Field::omega_b, Field::delta_a,
    Field::delta_b, Field::gamma_a, Field::gamma_b};

const char* to_string(Field f);
double& field_of(LambdaParams& p, Field f);
double field_of(const LambdaParams& p, Field f);

/// Values taken by one parameter; more than one value makes it a swept axis.
struct Axis
{
    Field field;
    std::vector<double> values;

    bool swept() const { return values.size() > 1; }
};

struct TauSpec
{
    double step = default_tau_step;
    std::optional<double> max; ///< empty means sized from the slowest decay
};

struct RunConfig
{
    std::string command;
    std::string name;
    std::string source; ///< file the config came from, for diagnostics
    Units units = Units::scaled;
    double gamma_a_mhz = 14.7; ///< only used when units == mhz

    /// all six fields in all_fields order, scaled to gamma_a units
    std::vector<Axis> axes;
    std::vector<QuadraturePhase> phi;
    std::vector<std::string> phi_labels; ///< as written, for column names
    TauSpec tau;
    FrequencyGrid omega = default_frequency_grid();
    double eta = 1.0;
    std::vector<SpectrumKind> kinds{SpectrumKind::Incoherent};
    bool split = false; ///< chd: also emit h2 and h3

    std::vector<const Axis*> swept_axes() const;
    /// parameter sets of the sweep, first swept axis varying slowest
    std::vector<LambdaParams> points() const;
    LambdaParams base() const;
};

/**
 * Key -> line lookup for a JSON text with comments. Paths are JSON pointers
 * such as "/runs/2/phi".
 */
class KeyLines
{
public:
    explicit KeyLines(const std::string& text);
    std::optional<std::size_t> find(const std::string& pointer) const;

private:
    std::vector<std::pair<std::string, std::size_t>> lines_;
};

/// Parses JSON with comments; syntax errors become config_error with a line.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);

std::string read_file(const std::filesystem::path& path,
                      const std::string& field = "");

/**
 * Builds a RunConfig from one JSON object. `pointer` is the object's location
 * in the file (empty for the root) and only used for diagnostics. The units
 * override, when given, wins over a "units" key.
 */
RunConfig parse_run_config(const nlohmann::json& j, const std::string& command,
                           const std::string& source, const KeyLines& lines,
                           const std::string& pointer = "",
                           std::optional<Units> units_override = std::nullopt);

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::string& command,
                          std::optional<Units> units_override = std::nullopt);

/// Default config for a command when no file is given: the working point.
RunConfig default_run_config(const std::string& command,
                             std::optional<Units> units_override = std::nullopt);

/// "pi/2", "3pi/4", "-pi", "0.5" and plain numbers.
std::optional<double> parse_phase(const std::string& text);

} // namespace lcpt::cli
