#include "validate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include <lcpt/oracle.hpp>

#include "csv.hpp"
#include "parallel.hpp"

namespace lcpt::cli {

using std::numbers::pi;

double steady_state_gap(const LambdaParams& p)
{
    const auto rk4 = oracle::relax_to_steady_state(p);
    const Matrix3c solved = solve_steady_state(p).density_matrix();
    return (rk4.matrix() - solved).cwiseAbs().maxCoeff();
}

double initial_vector_gap(const LambdaParams& p)
{
    using oracle::fluct;
    const auto ss = solve_steady_state(p);
    const oracle::DensityMatrix rho(ss.density_matrix());
    const Vector9c g2 = second_order_initial(ss);
    const Vector9c g3 = third_order_initial(ss);
    double worst = 0.0;
    for (auto op : all_operators) {
        const auto i = to_index(op);
        const complex d2 =
            oracle::direct_moment(rho, {fluct(OperatorIndex::ea), fluct(op)});
        const complex d3 = oracle::direct_moment(
            rho, {fluct(OperatorIndex::ea), fluct(op), fluct(OperatorIndex::ae)});
        worst = std::max({worst, std::abs(d2 - g2(i)), std::abs(d3 - g3(i))});
    }
    return worst;
}

double chd_oracle_gap(const LambdaParams& p, const QuadraturePhase& phi,
                      const TauGrid& grid)
{
    const auto fl = analyze(p);
    const auto ref = oracle::chd_time_domain(
        p, oracle::DensityMatrix(fl.steady.density_matrix()), phi, grid);
    const auto pos = h_positive(fl, phi, grid);
    const auto neg = h_negative(fl, phi, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.count; ++i) {
        worst = std::max({worst, std::abs(pos[i] - ref.positive[i]),
                          std::abs(neg[i] - ref.negative[i])});
    }
    return worst;
}

namespace {

/// Oracle time-domain correlation whose transform defines `kind`.
std::vector<complex> kind_trace(const oracle::ChdTimeDomain& ref,
                                SpectrumKind kind, double excited,
                                double gamma_a, double eta)
{
    std::vector<complex> f(ref.grid.count);
    const double chd = 4.0 * gamma_a * excited;
    for (std::size_t i = 0; i < f.size(); ++i) {
        switch (kind) {
        case SpectrumKind::Incoherent:
            f[i] = ref.dipole[i] / (pi * excited);
            break;
        case SpectrumKind::ChdPositive:
            f[i] = chd * (ref.positive[i] - 1.0);
            break;
        case SpectrumKind::ChdNegative:
            f[i] = chd * (ref.negative[i] - 1.0);
            break;
        case SpectrumKind::ChdSecond:
            f[i] = chd * ref.second[i];
            break;
        case SpectrumKind::ChdThird:
            f[i] = chd * ref.third[i];
            break;
        case SpectrumKind::Squeezing:
            f[i] = 8.0 * gamma_a * eta * ref.quadrature[i];
            break;
        }
    }
    return f;
}

} // namespace

double spectrum_oracle_gap(const LambdaParams& p, SpectrumKind kind,
                           std::optional<QuadraturePhase> phi,
                           const FrequencyGrid& grid, double eta)
{
    const auto fl = analyze(p);
    const TauGrid tau = fl.auto_grid();
    // The incoherent kind has no phase; any phase serves for its dipole trace.
    const QuadraturePhase q = phi.value_or(
        QuadraturePhase(std::arg(fl.steady(OperatorIndex::ea))));
    const auto ref = oracle::chd_time_domain(
        p, oracle::DensityMatrix(fl.steady.density_matrix()), q, tau);
    const auto f = kind_trace(ref, kind, fl.steady.excited_population(),
                              p.gamma_a, eta);
    const auto omega = grid.values();
    const auto transform = oracle::quadrature_transform(
        std::span<const complex>(f), tau.step, omega,
        kind == SpectrumKind::Incoherent ? oracle::Kernel::complex_exponential
                                         : oracle::Kernel::cosine);
    const SpectralDensity density(fl, kind, phi, Efficiency(eta));
    double worst = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k) {
        worst = std::max(worst, std::abs(density(omega[k]) -
                                         transform.values[k].real()));
    }
    return worst;
}

std::vector<Check> run_validation(unsigned threads, std::ostream* progress)
{
    auto params = oracle::random_params(5, 20201015);
    params.insert(params.begin(), working_point());

    std::vector<Check> checks;
    auto report = [&](Check c) {
        if (progress) {
            *progress << fmt::format("{} {}: worst {:.3g} (tolerance {:.0e})\n",
                                     c.pass() ? "PASS" : "FAIL", c.name,
                                     c.worst, c.tolerance);
            progress->flush();
        }
        checks.push_back(std::move(c));
    };

    auto worst_over = [&](auto fn) {
        std::vector<double> w(params.size());
        parallel_for(params.size(), threads,
                     [&](std::size_t i) { w[i] = fn(params[i]); });
        return *std::max_element(w.begin(), w.end());
    };

    report({"steady state vs RK4 relaxation", worst_over(steady_state_gap), 1e-8});
    report({"initial vectors vs direct operator algebra",
            worst_over(initial_vector_gap), 1e-12});
    const TauGrid tau{0.01, 2001};
    for (double phi : {0.0, pi / 2}) {
        report({fmt::format("h on both branches vs RK4, phi = {:.4g}", phi),
                worst_over([&](const LambdaParams& p) {
                    return chd_oracle_gap(p, QuadraturePhase(phi), tau);
                }),
                1e-6});
    }

    const FrequencyGrid grid{-8.0, 8.0, 161};
    struct Item
    {
        SpectrumKind kind;
        std::optional<QuadraturePhase> phi;
    };
    std::vector<Item> items{{SpectrumKind::Incoherent, std::nullopt}};
    for (double phi : {0.0, pi / 2}) {
        for (auto k : {SpectrumKind::ChdPositive, SpectrumKind::ChdNegative,
                       SpectrumKind::ChdSecond, SpectrumKind::ChdThird,
                       SpectrumKind::Squeezing}) {
            items.push_back({k, QuadraturePhase(phi)});
        }
    }
    std::vector<double> gaps(items.size());
    parallel_for(items.size(), threads, [&](std::size_t i) {
        gaps[i] = spectrum_oracle_gap(working_point(), items[i].kind,
                                      items[i].phi, grid);
    });
    for (std::size_t i = 0; i < items.size(); ++i) {
        std::string name = fmt::format("{} spectrum vs quadrature",
                                       to_string(items[i].kind));
        if (items[i].phi) {
            name += fmt::format(", phi = {:.4g}", items[i].phi->radians());
        }
        report({name, gaps[i], 1e-4});
    }
    return checks;
}

// --- fixture -----------------------------------------------------------------

LambdaParams FixturePoints::fig2_upper(std::size_t k)
{
    static constexpr double delta[] = {0.0, 2.4, 5.0};
    static constexpr double omega[] = {0.5, 1.5, 2.5};
    LambdaParams p = working_point();
    p.delta_a = delta[k];
    p.omega_a = omega[k];
    return p;
}

LambdaParams FixturePoints::incoherent_slice(std::size_t k)
{
    LambdaParams p = working_point();
    p.delta_a = k == 0 ? 2.39 : 3.4;
    return p;
}

LambdaParams FixturePoints::weak_drive()
{
    LambdaParams p = working_point();
    p.omega_a = 0.05;
    return p;
}

namespace {

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

Fixture compute_fixture(unsigned threads)
{
    using Task = std::function<void(Fixture&)>;
    std::vector<Task> tasks;
    const LambdaParams wp = working_point();

    tasks.emplace_back([wp](Fixture& f) {
        f["steady.alpha_ee.working_point"] =
            oracle::relax_to_steady_state(wp).expectation(OperatorIndex::ee).real();
    });
    for (std::size_t k = 0; k < 3; ++k) {
        tasks.emplace_back([k](Fixture& f) {
            const auto p = FixturePoints::fig2_upper(k);
            f[fmt::format("steady.alpha_ee.fig2_upper.{}", k)] =
                oracle::relax_to_steady_state(p).expectation(OperatorIndex::ee).real();
        });
    }

    // h at the working point from the defining correlations; the RK4 steady
    // state feeds the correlations so no main-path value enters.
    for (double phi : {0.0, pi / 2}) {
        tasks.emplace_back([wp, phi](Fixture& f) {
            const auto rho = oracle::relax_to_steady_state(wp);
            const TauGrid grid{0.01, 3001};
            const auto ref =
                oracle::chd_time_domain(wp, rho, QuadraturePhase(phi), grid);
            for (double t : FixturePoints::tau) {
                const auto i = static_cast<std::size_t>(std::llround(t / grid.step));
                f[fmt::format("chd.h_positive.phi={}.tau={}", phi_key(phi), t)] =
                    ref.positive[i];
                f[fmt::format("chd.h_negative.phi={}.tau={}", phi_key(phi), t)] =
                    ref.negative[i];
            }
            double asym = 0.0;
            for (std::size_t i = 0; i < grid.count; ++i) {
                asym = std::max(asym, std::abs(ref.positive[i] - ref.negative[i]));
            }
            f[fmt::format("chd.asymmetry.phi={}", phi_key(phi))] = asym;
        });
    }

    for (std::size_t k = 0; k < 2; ++k) {
        tasks.emplace_back([k](Fixture& f) {
            const auto p = FixturePoints::incoherent_slice(k);
            const auto rho = oracle::relax_to_steady_state(p);
            const double excited = rho.expectation(OperatorIndex::ee).real();
            const TauGrid grid = analyze(p).auto_grid();
            const auto ref = oracle::chd_time_domain(
                p, rho, QuadraturePhase(std::arg(rho.expectation(OperatorIndex::ea))),
                grid);
            const auto tr = kind_trace(ref, SpectrumKind::Incoherent, excited,
                                       p.gamma_a, 1.0);
            const std::vector<double> omega(FixturePoints::omega.begin(),
                                            FixturePoints::omega.end());
            const auto q = oracle::quadrature_transform(
                std::span<const complex>(tr), grid.step, omega,
                oracle::Kernel::complex_exponential);
            for (std::size_t w = 0; w < omega.size(); ++w) {
                f[fmt::format("spectrum.incoherent.delta_a={}.omega={}",
                              k == 0 ? "2.39" : "3.4", omega[w])] = q.values[w].real();
            }
        });
    }

    tasks.emplace_back([](Fixture& f) {
        const auto p = FixturePoints::weak_drive();
        const auto rho = oracle::relax_to_steady_state(p);
        const double excited = rho.expectation(OperatorIndex::ee).real();
        const TauGrid grid = analyze(p).auto_grid();
        const auto ref = oracle::chd_time_domain(p, rho, QuadraturePhase(0.0), grid);
        f["weak_drive.h3_over_h2.phi=0"] = max_abs(ref.third) / max_abs(ref.second);

        const auto omega = default_frequency_grid().values();
        const auto s2 = kind_trace(ref, SpectrumKind::ChdSecond, excited, p.gamma_a, 1.0);
        const auto s3 = kind_trace(ref, SpectrumKind::ChdThird, excited, p.gamma_a, 1.0);
        auto sup = [&](const std::vector<complex>& tr) {
            const auto q = oracle::quadrature_transform(
                std::span<const complex>(tr), grid.step, omega,
                oracle::Kernel::cosine);
            double m = 0.0;
            for (const auto& v : q.values) {
                m = std::max(m, std::abs(v.real()));
            }
            return m;
        };
        f["weak_drive.s3_over_s2.phi=0"] = sup(s3) / sup(s2);
    });

    std::vector<Fixture> parts(tasks.size());
    parallel_for(tasks.size(), threads, [&](std::size_t i) { tasks[i](parts[i]); });
    Fixture all;
    for (auto& part : parts) {
        all.merge(part);
    }
    return all;
}

void write_fixture(const Fixture& f, const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "# lcpt reference values, computed by the RK4 / direct-algebra / "
           "trapezoid oracles only\n";
    out << "# regenerate with: lcpt validate --write-fixture <path>\n";
    out << "format " << fixture_format << '\n';
    for (const auto& [key, value] : f) {
        out << key << ' ' << format_number(value) << '\n';
    }
}

Fixture read_fixture(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read fixture " + path.string());
    }
    Fixture f;
    std::string line;
    bool versioned = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream ss(line);
        std::string key;
        double value = 0.0;
        if (!(ss >> key >> value)) {
            throw std::runtime_error("malformed fixture line: " + line);
        }
        if (key == "format") {
            if (value != fixture_format) {
                throw std::runtime_error("unsupported fixture format");
            }
            versioned = true;
            continue;
        }
        f[key] = value;
    }
    if (!versioned) {
        throw std::runtime_error("fixture has no format line");
    }
    return f;
}

} // namespace lcpt::cli
