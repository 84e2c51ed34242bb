#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "regression.hpp"

namespace lcpt {

/// Local-oscillator phase; canonicalized to [0, 2 pi).
class QuadraturePhase
{
public:
    QuadraturePhase() = default;
    explicit QuadraturePhase(double phi)
    {
        if (!std::isfinite(phi)) {
            throw std::invalid_argument("quadrature phase must be finite");
        }
        constexpr double two_pi = 2.0 * std::numbers::pi;
        phi_ = std::fmod(phi, two_pi);
        if (phi_ < 0.0) {
            phi_ += two_pi;
        }
        if (phi_ >= two_pi) {
            phi_ = 0.0;
        }
    }

    double radians() const { return phi_; }

    /// e^{-i phi}
    complex rotation() const { return std::polar(1.0, -phi_); }

    /// (x_ea e^{-i phi} + x_ae e^{i phi}) / 2 for a vector indexed by s.
    complex project(const Vector9c& v) const
    {
        const complex r = rotation();
        return 0.5 * (r * v(to_index(OperatorIndex::ea)) +
                      std::conj(r) * v(to_index(OperatorIndex::ae)));
    }

    /// alpha_phi = Re(e^{-i phi} alpha_ea)
    double mean_amplitude(const SteadyState& ss) const
    {
        return (rotation() * ss(OperatorIndex::ea)).real();
    }

private:
    double phi_ = 0.0;
};

inline constexpr double excitation_floor = 1e-12;
inline constexpr double quadrature_floor = 1e-12;
inline constexpr double violation_tolerance = 1e-9;

/// alpha_ee alpha_phi, after checking both are usable.
inline double chd_normalization(const StationaryFluctuations& fl,
                                const QuadraturePhase& phi)
{
    const double excited = fl.steady.excited_population();
    if (excited < excitation_floor) {
        throw vanishing_excitation("alpha_ee = " + detail::show(excited) +
                                   " (exact population trapping)");
    }
    const double amplitude = phi.mean_amplitude(fl.steady);
    if (std::abs(amplitude) < quadrature_floor) {
        throw degenerate_quadrature("|alpha_phi| = " +
                                    detail::show(std::abs(amplitude)));
    }
    return excited * amplitude;
}

/**
 * Raw CHD building blocks on tau >= 0:
 *   second[i]    = <dsigma_ea(0) dsigma_phi(tau_i)>
 *   third[i]     = <dsigma_ea(0) dsigma_phi(tau_i) dsigma_ae(0)>
 *   intensity[i] = <dsigma_ea(0) dsigma_ee(tau_i)>
 */
struct ChdCorrelations
{
    TauGrid grid;
    std::vector<complex> second;
    std::vector<complex> third;
    std::vector<complex> intensity;
};

inline ChdCorrelations chd_correlations(const StationaryFluctuations& fl,
                                        const QuadraturePhase& phi,
                                        const TauGrid& grid)
{
    const auto g2 = propagate_values(fl.matrix(), fl.second, grid);
    const auto g3 = propagate_values(fl.matrix(), fl.third, grid);
    ChdCorrelations c{grid, {}, {}, {}};
    c.second.reserve(grid.count);
    c.third.reserve(grid.count);
    c.intensity.reserve(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        c.second.push_back(phi.project(g2[i]));
        c.third.push_back(phi.project(g3[i]));
        c.intensity.push_back(g2[i](to_index(OperatorIndex::ee)));
    }
    return c;
}

/// Second- and third-order parts of h_phi on tau >= 0.
struct ChdSplit
{
    std::vector<double> second;
    std::vector<double> third;
    /// max |Im| of the third-order term before taking the real part
    double imaginary_residual = 0.0;
};

inline ChdSplit h_split(const StationaryFluctuations& fl,
                        const QuadraturePhase& phi, const TauGrid& grid)
{
    const double norm = chd_normalization(fl, phi);
    const auto c = chd_correlations(fl, phi, grid);
    const complex alpha_ae = fl.steady(OperatorIndex::ae);

    ChdSplit s;
    s.second.reserve(grid.count);
    s.third.reserve(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        s.second.push_back(2.0 * (alpha_ae * c.second[i]).real() / norm);
        s.third.push_back(c.third[i].real() / norm);
        s.imaginary_residual =
            std::max(s.imaginary_residual, std::abs(c.third[i].imag() / norm));
    }
    return s;
}

inline ChdSplit h_split(const LambdaParams& p, const QuadraturePhase& phi,
                        const TauGrid& grid)
{
    return h_split(analyze(p), phi, grid);
}

/// h_phi(tau >= 0) = 1 + h2 + h3.
inline std::vector<double> h_positive(const StationaryFluctuations& fl,
                                      const QuadraturePhase& phi,
                                      const TauGrid& grid)
{
    const auto s = h_split(fl, phi, grid);
    std::vector<double> h(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        h[i] = 1.0 + s.second[i] + s.third[i];
    }
    return h;
}

inline std::vector<double> h_positive(const LambdaParams& p,
                                      const QuadraturePhase& phi,
                                      const TauGrid& grid)
{
    return h_positive(analyze(p), phi, grid);
}

/**
 * h_phi(-tau_i) = 1 + Re[e^{-i phi} <dsigma_ea(0) dsigma_ee(tau_i)>] /
 * (alpha_ee alpha_phi). Element 0 (tau = 0) is the positive-branch value.
 */
inline std::vector<double> h_negative(const StationaryFluctuations& fl,
                                      const QuadraturePhase& phi,
                                      const TauGrid& grid)
{
    const double norm = chd_normalization(fl, phi);
    const auto g2 = propagate_values(fl.matrix(), fl.second, grid);
    const complex r = phi.rotation();
    std::vector<double> h(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        h[i] = 1.0 + (r * g2[i](to_index(OperatorIndex::ee))).real() / norm;
    }
    h[0] = h_positive(fl, phi, TauGrid{grid.step, 1})[0];
    return h;
}

inline std::vector<double> h_negative(const LambdaParams& p,
                                      const QuadraturePhase& phi,
                                      const TauGrid& grid)
{
    return h_negative(analyze(p), phi, grid);
}

/**
 * Two-sided CHD signal. tau runs from -tau_max to tau_max; second/third are
 * defined on the tau >= 0 half only (index zero_index onward).
 */
struct ChdSignal
{
    std::vector<double> tau;
    std::vector<double> h;
    std::vector<double> second;
    std::vector<double> third;
    std::size_t zero_index = 0;
    QuadraturePhase phi;
    std::optional<LambdaParams> params;
    /// false when h holds unnormalized numerators (near-CPT guard)
    bool normalized = true;
    double imaginary_residual = 0.0;
};

namespace detail {
inline ChdSignal assemble_signal(const TauGrid& grid,
                                 const std::vector<double>& positive,
                                 const std::vector<double>& negative)
{
    ChdSignal s;
    const std::size_t n = grid.count;
    s.zero_index = n - 1;
    s.tau.reserve(2 * n - 1);
    s.h.reserve(2 * n - 1);
    for (std::size_t k = n; k-- > 1;) {
        s.tau.push_back(-grid[k]);
        s.h.push_back(negative[k]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        s.tau.push_back(grid[k]);
        s.h.push_back(positive[k]);
    }
    return s;
}
} // namespace detail

inline ChdSignal chd_signal(const StationaryFluctuations& fl,
                            const QuadraturePhase& phi, const TauGrid& grid)
{
    const auto split = h_split(fl, phi, grid);
    std::vector<double> positive(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        positive[i] = 1.0 + split.second[i] + split.third[i];
    }
    const auto negative = h_negative(fl, phi, grid);

    ChdSignal s = detail::assemble_signal(grid, positive, negative);
    s.second = split.second;
    s.third = split.third;
    s.phi = phi;
    s.params = fl.params();
    s.imaginary_residual = split.imaginary_residual;
    return s;
}

inline ChdSignal chd_signal(const LambdaParams& p, const QuadraturePhase& phi,
                            const TauGrid& grid)
{
    return chd_signal(analyze(p), phi, grid);
}

/**
 * Unnormalized CHD numerators, usable at exact trapping where alpha_ee -> 0:
 *   tau >= 0: <sigma_ea(0) sigma_phi(tau) sigma_ae(0)>
 *   tau <= 0: Re[e^{-i phi} <sigma_ea(0) sigma_ee(|tau|)>]
 * second/third hold the unnormalized split terms.
 */
inline ChdSignal chd_numerator(const StationaryFluctuations& fl,
                               const QuadraturePhase& phi,
                               const TauGrid& grid)
{
    const auto c = chd_correlations(fl, phi, grid);
    const double mean = fl.steady.excited_population() *
                        phi.mean_amplitude(fl.steady);
    const complex alpha_ae = fl.steady(OperatorIndex::ae);
    const complex r = phi.rotation();

    std::vector<double> positive(grid.count), negative(grid.count);
    std::vector<double> second(grid.count), third(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i) {
        second[i] = 2.0 * (alpha_ae * c.second[i]).real();
        third[i] = c.third[i].real();
        positive[i] = mean + second[i] + third[i];
        negative[i] = mean + (r * c.intensity[i]).real();
    }
    negative[0] = positive[0];

    ChdSignal s = detail::assemble_signal(grid, positive, negative);
    s.second = std::move(second);
    s.third = std::move(third);
    s.phi = phi;
    s.params = fl.params();
    s.normalized = false;
    return s;
}

enum class ClassicalBound {
    Deviation,      ///< 0 <= h - 1 <= 1
    SecondOrderDecay, ///< |h2(tau)| <= |h2(0)|
    SecondOrderUnit,  ///< |h2(0)| <= 1
    CoherentState   ///< -1 <= h <= 1
};

enum class BoundEdge { lower, upper };

/// A contiguous run of grid points crossing one edge of one bound.
struct Violation
{
    ClassicalBound bound;
    BoundEdge edge;
    double tau_begin;
    double tau_end;
    double extreme; ///< the tested quantity furthest past the edge
};

struct ViolationReport
{
    std::vector<Violation> violations;

    bool any() const { return !violations.empty(); }
    bool violates(ClassicalBound b) const
    {
        for (const auto& v : violations) {
            if (v.bound == b) {
                return true;
            }
        }
        return false;
    }
};

namespace detail {
// Appends runs of points where value(i) lies outside [lo, hi] (with tolerance).
template <class Value>
void collect_runs(ViolationReport& report, ClassicalBound bound,
                  const std::vector<double>& tau, std::size_t first,
                  std::size_t last, double lo, double hi, Value value)
{
    for (BoundEdge edge : {BoundEdge::lower, BoundEdge::upper}) {
        auto crosses = [&](double x) {
            return edge == BoundEdge::lower ? x < lo - violation_tolerance
                                            : x > hi + violation_tolerance;
        };
        std::optional<Violation> run;
        for (std::size_t i = first; i < last; ++i) {
            const double x = value(i);
            if (crosses(x)) {
                if (!run) {
                    run = Violation{bound, edge, tau[i], tau[i], x};
                }
                run->tau_end = tau[i];
                run->extreme = edge == BoundEdge::lower
                                   ? std::min(run->extreme, x)
                                   : std::max(run->extreme, x);
            }
            else if (run) {
                report.violations.push_back(*run);
                run.reset();
            }
        }
        if (run) {
            report.violations.push_back(*run);
        }
    }
}
} // namespace detail

/// Checks the classical CHD inequalities over the whole signal.
inline ViolationReport classify_nonclassical(const ChdSignal& s)
{
    ViolationReport report;
    const std::size_t n = s.h.size();
    const auto& h = s.h;

    detail::collect_runs(report, ClassicalBound::Deviation, s.tau, 0, n, 0.0,
                         1.0, [&](std::size_t i) { return h[i] - 1.0; });

    if (!s.second.empty()) {
        const double h2_zero = std::abs(s.second.front());
        std::vector<double> tau_pos(s.tau.begin() + static_cast<std::ptrdiff_t>(s.zero_index),
                                    s.tau.end());
        detail::collect_runs(
            report, ClassicalBound::SecondOrderDecay, tau_pos, 1,
            s.second.size(), -h2_zero, h2_zero,
            [&](std::size_t i) { return s.second[i]; });
        detail::collect_runs(report, ClassicalBound::SecondOrderUnit, tau_pos,
                             0, 1, 0.0, 1.0,
                             [&](std::size_t) { return h2_zero; });
    }

    detail::collect_runs(report, ClassicalBound::CoherentState, s.tau, 0, n,
                         -1.0, 1.0, [&](std::size_t i) { return h[i]; });
    return report;
}

} // namespace lcpt
