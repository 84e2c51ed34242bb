// Compares the main computational path with oracle values frozen in the
// fixture file. Regenerate the fixture with `lcpt validate --write-fixture`.
#include <gtest/gtest.h>

#include <fmt/format.h>
#include <numbers>

#include <lcpt/lcpt.hpp>

#include "lcpt/validate.hpp"

using namespace lcpt;
using lcpt::cli::FixturePoints;
using std::numbers::pi;

namespace {

const cli::Fixture& fixture()
{
    static const cli::Fixture f = cli::read_fixture(LCPT_FIXTURE);
    return f;
}

double frozen(const std::string& key)
{
    const auto it = fixture().find(key);
    if (it == fixture().end()) {
        throw std::out_of_range("fixture has no key " + key);
    }
    return it->second;
}

std::string phi_key(double phi)
{
    return phi == 0.0 ? "0" : "pi/2";
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

} // namespace

TEST(Reference, FixtureIsVersionedAndComplete)
{
    EXPECT_EQ(fixture().size(), 28u);
}

TEST(Reference, SteadyStatePopulations)
{
    EXPECT_NEAR(solve_steady_state(working_point()).excited_population(),
                frozen("steady.alpha_ee.working_point"), 1e-8);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(
            solve_steady_state(FixturePoints::fig2_upper(k)).excited_population(),
            frozen(fmt::format("steady.alpha_ee.fig2_upper.{}", k)), 1e-8);
    }
}

TEST(Reference, ChdAtWorkingPoint)
{
    const auto fl = analyze(working_point());
    const TauGrid grid{0.01, 3001};
    for (double phi : {0.0, pi / 2}) {
        const QuadraturePhase q(phi);
        const auto pos = h_positive(fl, q, grid);
        const auto neg = h_negative(fl, q, grid);
        for (double t : FixturePoints::tau) {
            const auto i = static_cast<std::size_t>(std::llround(t / grid.step));
            EXPECT_NEAR(pos[i],
                        frozen(fmt::format("chd.h_positive.phi={}.tau={}",
                                        phi_key(phi), t)),
                        1e-6);
            EXPECT_NEAR(neg[i],
                        frozen(fmt::format("chd.h_negative.phi={}.tau={}",
                                        phi_key(phi), t)),
                        1e-6);
        }
        double asym = 0.0;
        for (std::size_t i = 0; i < grid.count; ++i) {
            asym = std::max(asym, std::abs(pos[i] - neg[i]));
        }
        const double expected =
            frozen(fmt::format("chd.asymmetry.phi={}", phi_key(phi)));
        EXPECT_NEAR(asym, expected, 1e-6);
        EXPECT_GT(asym, 0.05);
    }
}

TEST(Reference, IncoherentSpectrumSlices)
{
    const char* labels[] = {"2.39", "3.4"};
    for (std::size_t k = 0; k < 2; ++k) {
        const SpectralDensity s(analyze(FixturePoints::incoherent_slice(k)),
                                SpectrumKind::Incoherent);
        for (double w : FixturePoints::omega) {
            EXPECT_NEAR(s(w),
                        frozen(fmt::format("spectrum.incoherent.delta_a={}.omega={}",
                                        labels[k], w)),
                        1e-4)
                << labels[k] << " " << w;
        }
    }
}

// The weak-drive ratios are far from small: with the control field at
// Omega_b = 2.15 the fluctuations stay non-Gaussian however weak the probe.
TEST(Reference, WeakDriveRatios)
{
    const auto fl = analyze(FixturePoints::weak_drive());
    const QuadraturePhase q(0.0);
    const auto split = h_split(fl, q, fl.auto_grid());
    EXPECT_NEAR(max_abs(split.third) / max_abs(split.second),
                frozen("weak_drive.h3_over_h2.phi=0"), 1e-6);

    const auto grid = default_frequency_grid();
    const SpectralDensity s2(fl, SpectrumKind::ChdSecond, q);
    const SpectralDensity s3(fl, SpectrumKind::ChdThird, q);
    const double ratio = max_abs(sample(s3, grid).values) /
                         max_abs(sample(s2, grid).values);
    EXPECT_NEAR(ratio / frozen("weak_drive.s3_over_s2.phi=0"), 1.0, 1e-4);
}
