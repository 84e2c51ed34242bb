#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "errors.hpp"
#include "model.hpp"
#include "operator_index.hpp"

namespace lcpt {

/**
 * Which equal-time fluctuation moment seeds g(tau) = <dsigma_ea(0) ds(tau) dA(0)>.
 * SecondOrder: dA = 1. ThirdOrder: dA = dsigma_ae. IntensityBranch is the
 * second-order seed as used by the tau <= 0 CHD branch.
 */
enum class InitialConditionKind { SecondOrder, ThirdOrder, IntensityBranch };

/// <dsigma_ea ds_k>_ss for every s_k, from <ds_ij ds_kl> = a_il d_jk - a_ij a_kl.
inline Vector9c second_order_initial(const SteadyState& ss)
{
    using O = OperatorIndex;
    const complex ee = ss(O::ee), ae = ss(O::ae), be = ss(O::be);
    const complex ea = ss(O::ea), aa = ss(O::aa), ba = ss(O::ba);
    const complex eb = ss(O::eb), ab = ss(O::ab), bb = ss(O::bb);

    Vector9c g;
    g << -ea * ee,
         ee - ea * ae,
         -ea * be,
         -ea * ea,
         ea * (1.0 - aa),
         -ea * ba,
         -ea * eb,
         eb - ea * ab,
         -ea * bb;
    return g;
}

/// <dsigma_ea ds_k dsigma_ae>_ss for every s_k.
inline Vector9c third_order_initial(const SteadyState& ss)
{
    using O = OperatorIndex;
    const complex ee = ss(O::ee), ae = ss(O::ae), be = ss(O::be);
    const complex ea = ss(O::ea), aa = ss(O::aa), ba = ss(O::ba);
    const complex eb = ss(O::eb), ab = ss(O::ab), bb = ss(O::bb);

    const double dipole2 = std::norm(ea);
    const complex c = 2.0 * dipole2 - ee;

    Vector9c g;
    g << ee * c,
         -2.0 * ae * (ee - dipole2),
         be * c,
         2.0 * ea * (dipole2 - ee),
         c * (aa - 1.0),
         ba * c - ea * be,
         eb * c,
         ab * c - eb * ae,
         bb * c;
    return g;
}

inline Vector9c initial_vector(const SteadyState& ss, InitialConditionKind kind)
{
    switch (kind) {
    case InitialConditionKind::ThirdOrder:
        return third_order_initial(ss);
    case InitialConditionKind::SecondOrder:
    case InitialConditionKind::IntensityBranch:
        break;
    }
    return second_order_initial(ss);
}

/// Uniform grid tau_i = i * step, i = 0 .. count-1.
struct TauGrid
{
    double step = 0.01;
    std::size_t count = 1;

    double operator[](std::size_t i) const
    {
        return static_cast<double>(i) * step;
    }
    double max() const { return (*this)[count - 1]; }
};

inline constexpr double default_tau_step = 0.01;
inline constexpr double default_tau_cap = 200.0;
inline constexpr double decay_tolerance = 1e-8;

struct CorrelationTrace
{
    TauGrid grid;
    std::vector<Vector9c> values;
    InitialConditionKind kind = InitialConditionKind::SecondOrder;
    std::optional<LambdaParams> params;

    /// Component k of g(tau_i) for every i.
    std::vector<complex> component(OperatorIndex op) const
    {
        std::vector<complex> out;
        out.reserve(values.size());
        for (const auto& v : values) {
            out.push_back(v(to_index(op)));
        }
        return out;
    }
};

/// One-step propagator exp(M dtau) (scaling and squaring, Pade core).
inline Matrix9c step_propagator(const Matrix9c& m, double step)
{
    return (m * complex(step)).exp();
}

/// values[i] = exp(M tau_i) g0, iterating the one-step propagator.
inline std::vector<Vector9c> propagate_values(const Matrix9c& m,
                                              const Vector9c& g0,
                                              const TauGrid& grid)
{
    if (grid.count == 0 || !(grid.step > 0.0)) {
        throw std::invalid_argument("tau grid needs a positive step");
    }
    if (!g0.allFinite()) {
        throw std::invalid_argument("initial vector is not finite");
    }
    const Matrix9c p = step_propagator(m, grid.step);
    const double limit = 1e6 * g0.norm();

    std::vector<Vector9c> values;
    values.reserve(grid.count);
    values.push_back(g0);
    for (std::size_t i = 1; i < grid.count; ++i) {
        values.push_back(p * values.back());
        const double n = values.back().norm();
        if (!std::isfinite(n) || n > limit) {
            throw propagation_diverged("norm " + detail::show(n) +
                                       " at tau = " +
                                       detail::show(grid[i]));
        }
    }
    return values;
}

inline CorrelationTrace propagate(const Matrix9c& m, const Vector9c& g0,
                                  const TauGrid& grid,
                                  InitialConditionKind kind =
                                      InitialConditionKind::SecondOrder)
{
    return CorrelationTrace{grid, propagate_values(m, g0, grid), kind,
                            std::nullopt};
}

inline CorrelationTrace propagate(const BlochGenerator& gen,
                                  const Vector9c& g0, const TauGrid& grid,
                                  InitialConditionKind kind =
                                      InitialConditionKind::SecondOrder)
{
    return CorrelationTrace{grid, propagate_values(gen.matrix(), g0, grid),
                            kind, gen.params()};
}

/**
 * Smallest grid whose last point has every seed decayed below `tolerance`,
 * capped at `cap`. Seeds that are already zero need a single point.
 */
inline TauGrid auto_tau_grid(const Matrix9c& m, std::span<const Vector9c> seeds,
                             double step = default_tau_step,
                             double cap = default_tau_cap,
                             double tolerance = decay_tolerance)
{
    const auto max_count =
        static_cast<std::size_t>(std::llround(cap / step)) + 1;
    const Matrix9c p = step_propagator(m, step);

    std::vector<Vector9c> current(seeds.begin(), seeds.end());
    auto decayed = [&] {
        return std::all_of(current.begin(), current.end(),
                           [&](const Vector9c& v) { return v.norm() < tolerance; });
    };

    std::size_t count = 1;
    while (count < max_count && !decayed()) {
        for (auto& v : current) {
            v = p * v;
        }
        ++count;
    }
    return TauGrid{step, count};
}

/// Everything downstream modules derive once per parameter set.
struct StationaryFluctuations
{
    BlochGenerator generator;
    SteadyState steady;
    Vector9c second; ///< <dsigma_ea ds>_ss
    Vector9c third;  ///< <dsigma_ea ds dsigma_ae>_ss

    const LambdaParams& params() const { return generator.params(); }
    const Matrix9c& matrix() const { return generator.matrix(); }

    TauGrid auto_grid(double step = default_tau_step,
                      double cap = default_tau_cap) const
    {
        const Vector9c seeds[] = {second, third};
        return auto_tau_grid(matrix(), seeds, step, cap);
    }
};

inline StationaryFluctuations analyze(const LambdaParams& p)
{
    BlochGenerator gen = build_bloch_generator(p);
    SteadyState ss = solve_steady_state(gen);
    Vector9c g2 = second_order_initial(ss);
    Vector9c g3 = third_order_initial(ss);
    return StationaryFluctuations{std::move(gen), std::move(ss), g2, g3};
}

} // namespace lcpt
