#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <lcpt/spectra.hpp>

namespace lcpt::cli {

/// Largest entrywise gap between RK4 relaxation and the linear solve.
double steady_state_gap(const LambdaParams& p);

/// Largest entrywise gap between the closed-form initial vectors and direct
/// operator algebra on the same steady state.
double initial_vector_gap(const LambdaParams& p);

/// Largest gap between h on both branches and RK4 evaluation of the defining
/// correlations, on `grid` (tau >= 0, mirrored for the negative branch).
double chd_oracle_gap(const LambdaParams& p, const QuadraturePhase& phi,
                      const TauGrid& grid);

/**
 * Largest gap between a resolvent spectrum and the trapezoid transform of
 * its RK4 time-domain correlation on the slowest-decay tau grid.
 */
double spectrum_oracle_gap(const LambdaParams& p, SpectrumKind kind,
                           std::optional<QuadraturePhase> phi,
                           const FrequencyGrid& grid, double eta = 1.0);

struct Check
{
    std::string name;
    double worst = 0.0;
    double tolerance = 0.0;

    bool pass() const { return worst <= tolerance; }
};

/// The oracle suite behind `lcpt validate`.
std::vector<Check> run_validation(unsigned threads, std::ostream* progress);

/// Ordered key -> value reference table.
using Fixture = std::map<std::string, double>;

inline constexpr int fixture_format = 1;

/// Reference values computed by the oracles only.
Fixture compute_fixture(unsigned threads);
void write_fixture(const Fixture& f, const std::filesystem::path& path);
Fixture read_fixture(const std::filesystem::path& path);

/// Parameter sets behind fixture keys, shared with the tests that read them.
struct FixturePoints
{
    static LambdaParams fig2_upper(std::size_t k); ///< k = 0, 1, 2
    static LambdaParams incoherent_slice(std::size_t k); ///< delta_a 2.39, 3.4
    static LambdaParams weak_drive();
    static constexpr std::array<double, 3> tau{0.5, 1.0, 2.0};
    static constexpr std::array<double, 4> omega{-2.0, 0.0, 1.0, 3.0};
};

} // namespace lcpt::cli
