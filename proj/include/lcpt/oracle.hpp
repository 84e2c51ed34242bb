#pragma once

/**
 * Brute-force validators that share no code path with the Bloch-generator
 * route: fixed-step RK4 integration of the 3x3 master equation, direct
 * operator-algebra moments, and trapezoid Fourier quadrature.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "chd.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "operator_index.hpp"
#include "regression.hpp"

namespace lcpt::oracle {

/// Hermitian, unit-trace, positive semidefinite 3x3 matrix over (e, a, b).
class DensityMatrix
{
public:
    explicit DensityMatrix(const Matrix3c& rho) : rho_(rho)
    {
        if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
            throw std::invalid_argument("density matrix is not Hermitian");
        }
        if (std::abs(rho_.trace() - 1.0) > 1e-12) {
            throw std::invalid_argument("density matrix trace is not 1");
        }
        const Eigen::SelfAdjointEigenSolver<Matrix3c> eig(rho_);
        if (eig.eigenvalues().minCoeff() < -1e-10) {
            throw std::invalid_argument("density matrix is not positive");
        }
    }

    static DensityMatrix pure(Level level)
    {
        return DensityMatrix(sigma(level, level));
    }

    const Matrix3c& matrix() const { return rho_; }

    /// <sigma_jk> = rho_kj
    complex expectation(OperatorIndex op) const
    {
        const auto [j, k] = levels_of(op);
        return rho_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
    }

private:
    Matrix3c rho_;
};

inline Matrix3c hamiltonian(const LambdaParams& p)
{
    const Matrix3c sa = sigma(Level::e, Level::a) + sigma(Level::a, Level::e);
    const Matrix3c sb = sigma(Level::e, Level::b) + sigma(Level::b, Level::e);
    return -p.delta_a * sigma(Level::a, Level::a) -
           p.delta_b * sigma(Level::b, Level::b) + 0.5 * p.omega_a * sa +
           0.5 * p.omega_b * sb;
}

/// Right-hand side of the master equation applied to any 3x3 operator.
class MasterEquation
{
public:
    explicit MasterEquation(const LambdaParams& p)
        : h_(hamiltonian(p)), params_(p),
          jump_a_(sigma(Level::a, Level::e)), jump_b_(sigma(Level::b, Level::e)),
          excited_(sigma(Level::e, Level::e))
    {
    }

    Matrix3c operator()(const Matrix3c& x) const
    {
        const complex i{0.0, 1.0};
        Matrix3c out = -i * (h_ * x - x * h_);
        out += params_.gamma_a * jump_a_ * x * jump_a_.adjoint();
        out += params_.gamma_b * jump_b_ * x * jump_b_.adjoint();
        out -= 0.5 * params_.gamma() * (excited_ * x + x * excited_);
        return out;
    }

    Matrix3c rk4_step(const Matrix3c& x, double dt) const
    {
        const Matrix3c k1 = (*this)(x);
        const Matrix3c k2 = (*this)(x + 0.5 * dt * k1);
        const Matrix3c k3 = (*this)(x + 0.5 * dt * k2);
        const Matrix3c k4 = (*this)(x + dt * k3);
        return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

private:
    Matrix3c h_;
    LambdaParams params_;
    Matrix3c jump_a_, jump_b_, excited_;
};

/// Fastest scale of the problem; RK4 steps must stay below 0.01 / scale.
inline double frequency_scale(const LambdaParams& p)
{
    return std::max({p.gamma(), p.omega_a, p.omega_b, std::abs(p.delta_a),
                     std::abs(p.delta_b)});
}

inline double max_step(const LambdaParams& p)
{
    const double scale = frequency_scale(p);
    return scale > 0.0 ? 0.01 / scale : 0.01;
}

/// Classic RK4 on rho; throws step_too_large if dt breaks the step bound or
/// the trace drifts by more than 1e-8.
inline DensityMatrix evolve_master_equation(const LambdaParams& p,
                                            const DensityMatrix& rho0,
                                            double t_final, double dt)
{
    p.validate();
    if (!(dt > 0.0) || dt > max_step(p) * (1.0 + 1e-12)) {
        throw step_too_large("dt = " + detail::show(dt) + " exceeds " +
                             detail::show(max_step(p)));
    }
    const MasterEquation eq(p);
    const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
    const double h = steps > 0 ? t_final / static_cast<double>(steps) : 0.0;
    Matrix3c rho = rho0.matrix();
    for (std::size_t n = 0; n < steps; ++n) {
        rho = eq.rk4_step(rho, h);
    }
    if (std::abs(rho.trace() - 1.0) > 1e-8) {
        throw step_too_large("trace drifted to " +
                             detail::show(std::abs(rho.trace())));
    }
    // clean round-off so the result satisfies DensityMatrix invariants
    Matrix3c herm = 0.5 * (rho + rho.adjoint());
    herm /= herm.trace();
    return DensityMatrix(herm);
}

/**
 * Stationary state by RK4 relaxation from |a><a| until ||d rho/dt|| < tol.
 * The RK4 map fixes the exact stationary state, so dt only affects speed.
 */
inline DensityMatrix relax_to_steady_state(const LambdaParams& p,
                                           double tol = 1e-12,
                                           double t_cap = 1e5)
{
    p.validate();
    const MasterEquation eq(p);
    const double dt = max_step(p);
    Matrix3c rho = sigma(Level::a, Level::a);
    double t = 0.0;
    while (eq(rho).norm() >= tol) {
        for (int n = 0; n < 100; ++n) {
            rho = eq.rk4_step(rho, dt);
        }
        t += 100 * dt;
        if (t > t_cap) {
            throw step_too_large("no convergence to steady state by t = " +
                                 detail::show(t_cap));
        }
    }
    Matrix3c herm = 0.5 * (rho + rho.adjoint());
    herm /= herm.trace();
    return DensityMatrix(herm);
}

/// x(tau_i) = exp(L tau_i) x0 on the grid, with `substeps` RK4 steps per cell.
inline std::vector<Matrix3c> evolve_sampled(const LambdaParams& p,
                                            const Matrix3c& x0,
                                            const TauGrid& grid,
                                            std::size_t substeps)
{
    const MasterEquation eq(p);
    const double dt = grid.step / static_cast<double>(substeps);
    std::vector<Matrix3c> out;
    out.reserve(grid.count);
    Matrix3c x = x0;
    out.push_back(x);
    for (std::size_t i = 1; i < grid.count; ++i) {
        for (std::size_t n = 0; n < substeps; ++n) {
            x = eq.rk4_step(x, dt);
        }
        out.push_back(x);
    }
    return out;
}

/// Substeps per grid cell keeping dt at or below 1e-3 / frequency_scale.
inline std::size_t fine_substeps(const LambdaParams& p, double step)
{
    const double target = 0.1 * max_step(p);
    return static_cast<std::size_t>(std::ceil(step / target - 1e-9));
}

/// RK4 integration of dg/dtau = M g, sampled on the grid.
inline std::vector<Vector9c> integrate_linear(const Matrix9c& m,
                                              const Vector9c& g0,
                                              const TauGrid& grid,
                                              std::size_t substeps)
{
    const double dt = grid.step / static_cast<double>(substeps);
    std::vector<Vector9c> out;
    out.reserve(grid.count);
    Vector9c g = g0;
    out.push_back(g);
    for (std::size_t i = 1; i < grid.count; ++i) {
        for (std::size_t n = 0; n < substeps; ++n) {
            const Vector9c k1 = m * g;
            const Vector9c k2 = m * (g + 0.5 * dt * k1);
            const Vector9c k3 = m * (g + 0.5 * dt * k2);
            const Vector9c k4 = m * (g + dt * k3);
            g += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push_back(g);
    }
    return out;
}

/// One factor of an operator product: sigma_jk, optionally as a fluctuation.
struct Factor
{
    OperatorIndex op;
    bool fluctuation = true;
};

inline Factor fluct(OperatorIndex op) { return Factor{op, true}; }
inline Factor plain(OperatorIndex op) { return Factor{op, false}; }

/// <F1 F2 ... Fn> = Tr(rho F1 F2 ... Fn) with dsigma = sigma - <sigma> 1.
inline complex direct_moment(const DensityMatrix& rho,
                             std::span<const Factor> factors)
{
    Matrix3c product = Matrix3c::Identity();
    for (const Factor& f : factors) {
        Matrix3c op = sigma(f.op);
        if (f.fluctuation) {
            op -= rho.expectation(f.op) * Matrix3c::Identity();
        }
        product = product * op;
    }
    return (rho.matrix() * product).trace();
}

inline complex direct_moment(const DensityMatrix& rho,
                             std::initializer_list<Factor> factors)
{
    return direct_moment(rho, std::span<const Factor>(factors.begin(),
                                                      factors.size()));
}

/// Equal-time vectors <dsigma_ea ds_k> and <dsigma_ea ds_k dsigma_ae> by
/// explicit operator products.
inline Vector9c direct_second_order(const DensityMatrix& rho)
{
    Vector9c g;
    for (OperatorIndex op : all_operators) {
        g(to_index(op)) =
            direct_moment(rho, {fluct(OperatorIndex::ea), fluct(op)});
    }
    return g;
}

inline Vector9c direct_third_order(const DensityMatrix& rho)
{
    Vector9c g;
    for (OperatorIndex op : all_operators) {
        g(to_index(op)) = direct_moment(
            rho, {fluct(OperatorIndex::ea), fluct(op), fluct(OperatorIndex::ae)});
    }
    return g;
}

enum class Kernel { cosine, complex_exponential };

struct QuadratureTransform
{
    std::vector<double> omega;
    std::vector<complex> values;
    /// |f(tau_max)| relative to max |f|
    double tail_magnitude = 0.0;
    bool truncation_warning = false;
};

/**
 * Trapezoid rule for int_0^tau_max K(w tau) f(tau) dtau with K = cos or
 * e^{-i w tau}, f sampled on the uniform grid `step`.
 */
inline QuadratureTransform quadrature_transform(std::span<const complex> f,
                                                double step,
                                                std::span<const double> omega,
                                                Kernel kernel)
{
    QuadratureTransform out;
    out.omega.assign(omega.begin(), omega.end());
    out.values.reserve(omega.size());
    if (!f.empty()) {
        out.tail_magnitude = std::abs(f.back());
        out.truncation_warning = out.tail_magnitude > 1e-6;
    }
    for (double w : omega) {
        complex sum = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double wt = w * step * static_cast<double>(i);
            const complex k = kernel == Kernel::cosine
                                  ? complex(std::cos(wt), 0.0)
                                  : std::polar(1.0, -wt);
            const double weight = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
            sum += weight * k * f[i];
        }
        out.values.push_back(sum * step);
    }
    return out;
}

inline QuadratureTransform quadrature_transform(std::span<const double> f,
                                                double step,
                                                std::span<const double> omega,
                                                Kernel kernel)
{
    std::vector<complex> c(f.begin(), f.end());
    return quadrature_transform(std::span<const complex>(c), step, omega,
                                kernel);
}

/// CHD signals evaluated from their defining three-operator correlations.
struct ChdTimeDomain
{
    TauGrid grid;
    std::vector<double> positive; ///< h(tau_i)
    std::vector<double> negative; ///< h(-tau_i)
    std::vector<double> second;   ///< h2(tau_i)
    std::vector<double> third;    ///< h3(tau_i)
    /// <dsigma_ea(0) dsigma_ae(tau)>, the incoherent-spectrum correlation
    std::vector<complex> dipole;
    /// Re[e^{-i phi} <dsigma_ea(0) dsigma_phi(tau)>], the squeezing correlation
    std::vector<double> quadrature;
};

/**
 * RK4 evaluation of
 *   h(+tau) = Tr[sigma_phi e^{L tau}(sigma_ae rho sigma_ea)] / (a_ee a_phi)
 *   h(-tau) = Re[e^{-i phi} Tr[sigma_ee e^{L tau}(rho sigma_ea)]] / (a_ee a_phi)
 * and the fluctuation parts with sigma replaced by dsigma.
 */
inline ChdTimeDomain chd_time_domain(const LambdaParams& p,
                                     const DensityMatrix& rho,
                                     const QuadraturePhase& phi,
                                     const TauGrid& grid)
{
    using O = OperatorIndex;
    const Matrix3c id = Matrix3c::Identity();
    const Matrix3c s_ea = sigma(O::ea), s_ae = sigma(O::ae), s_ee = sigma(O::ee);
    const complex r = phi.rotation();
    const Matrix3c s_phi = 0.5 * (r * s_ea + std::conj(r) * s_ae);

    const complex a_ea = rho.expectation(O::ea);
    const complex a_ae = rho.expectation(O::ae);
    const double a_ee = rho.expectation(O::ee).real();
    const double a_phi = (r * a_ea).real();
    const double norm = a_ee * a_phi;
    const Matrix3c d_ea = s_ea - a_ea * id;
    const Matrix3c d_ae = s_ae - a_ae * id;
    const Matrix3c d_phi = s_phi - a_phi * id;
    const Matrix3c& m = rho.matrix();

    const std::size_t sub = fine_substeps(p, grid.step);
    const auto chi = evolve_sampled(p, s_ae * m * s_ea, grid, sub);
    const auto xi = evolve_sampled(p, m * s_ea, grid, sub);
    const auto chi_d = evolve_sampled(p, d_ae * m * d_ea, grid, sub);
    const auto xi_d = evolve_sampled(p, m * d_ea, grid, sub);

    ChdTimeDomain out{grid, {}, {}, {}, {}, {}, {}};
    for (std::size_t i = 0; i < grid.count; ++i) {
        out.positive.push_back((s_phi * chi[i]).trace().real() / norm);
        out.negative.push_back((r * (s_ee * xi[i]).trace()).real() / norm);
        out.second.push_back(
            2.0 * (a_ae * (d_phi * xi_d[i]).trace()).real() / norm);
        out.third.push_back((d_phi * chi_d[i]).trace().real() / norm);
        out.dipole.push_back((d_ae * xi_d[i]).trace());
        out.quadrature.push_back((r * (d_phi * xi_d[i]).trace()).real());
    }
    return out;
}

/// Omega in [0.1, 5], Delta in [-5, 5], gamma_b in [0.1, 1], gamma_a = 1.
inline std::vector<LambdaParams> random_params(std::size_t count,
                                               std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> omega(0.1, 5.0);
    std::uniform_real_distribution<double> delta(-5.0, 5.0);
    std::uniform_real_distribution<double> gamma_b(0.1, 1.0);
    std::vector<LambdaParams> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        LambdaParams p;
        p.omega_a = omega(rng);
        p.omega_b = omega(rng);
        p.delta_a = delta(rng);
        p.delta_b = delta(rng);
        p.gamma_a = 1.0;
        p.gamma_b = gamma_b(rng);
        out.push_back(p);
    }
    return out;
}

} // namespace lcpt::oracle
