#pragma once

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "errors.hpp"
#include "operator_index.hpp"

namespace lcpt {

/**
 * Driving and decay parameters of the Lambda atom. Frequencies and rates are
 * in units of gamma_a, so gamma_a is normally 1.
 */
struct LambdaParams
{
    double omega_a = 0.0; ///< probe Rabi frequency (|a> <-> |e>)
    double omega_b = 0.0; ///< control Rabi frequency (|b> <-> |e>)
    double delta_a = 0.0; ///< probe detuning
    double delta_b = 0.0; ///< control detuning
    double gamma_a = 1.0; ///< decay |e> -> |a>
    double gamma_b = 0.0; ///< decay |e> -> |b>

    /// Total decay rate of |e>.
    double gamma() const { return gamma_a + gamma_b; }

    void validate() const
    {
        const double fields[] = {omega_a, omega_b, delta_a,
                                 delta_b, gamma_a, gamma_b};
        for (double f : fields) {
            if (!std::isfinite(f)) {
                throw invalid_params("all fields must be finite");
            }
        }
        if (!(gamma_a > 0.0)) {
            throw invalid_params("gamma_a must be positive");
        }
        if (gamma_b < 0.0) {
            throw invalid_params("gamma_b must be non-negative");
        }
        if (omega_a < 0.0 || omega_b < 0.0) {
            throw invalid_params("Rabi frequencies must be non-negative");
        }
    }

    bool operator==(const LambdaParams&) const = default;
};

/// 138Ba+ working point: gamma_a = 14.7 MHz, gamma_b = 5.4 MHz.
inline LambdaParams working_point()
{
    return LambdaParams{1.12, 2.15, 3.4, 2.38, 1.0, 5.4 / 14.7};
}

enum class Transition { a, b };

/// Omega_j^2 / (gamma_j^2 + Delta_j^2) for transition j.
inline double saturation_parameter(const LambdaParams& p, Transition t)
{
    const double omega = t == Transition::a ? p.omega_a : p.omega_b;
    const double gamma = t == Transition::a ? p.gamma_a : p.gamma_b;
    const double delta = t == Transition::a ? p.delta_a : p.delta_b;
    if (omega == 0.0) {
        return 0.0;
    }
    return omega * omega / (gamma * gamma + delta * delta);
}

/// Trapping state (Omega_b |a> - Omega_a |b>) / norm in the (e, a, b) basis.
inline Vector3c dark_state(const LambdaParams& p)
{
    const double norm = std::hypot(p.omega_a, p.omega_b);
    if (norm == 0.0) {
        throw invalid_params("dark state needs a non-zero Rabi frequency");
    }
    return Vector3c(0.0, p.omega_b / norm, -p.omega_a / norm);
}

/**
 * Generator M of the nine Bloch equations d<s>/dt = M <s>, with s ordered as
 * in OperatorIndex.
 */
class BlochGenerator
{
public:
    BlochGenerator(const Matrix9c& m, const LambdaParams& params)
        : m_(m), params_(params)
    {
    }

    const Matrix9c& matrix() const { return m_; }
    const LambdaParams& params() const { return params_; }

private:
    Matrix9c m_;
    LambdaParams params_;
};

inline BlochGenerator build_bloch_generator(const LambdaParams& p)
{
    p.validate();

    using O = OperatorIndex;
    const complex i{0.0, 1.0};
    const double half_a = p.omega_a / 2.0;
    const double half_b = p.omega_b / 2.0;
    const double half_gamma = p.gamma() / 2.0;

    Matrix9c m = Matrix9c::Zero();
    auto at = [&m](O row, O col) -> complex& {
        return m(to_index(row), to_index(col));
    };

    // populations
    at(O::aa, O::ae) = -i * half_a;
    at(O::aa, O::ea) = i * half_a;
    at(O::aa, O::ee) = p.gamma_a;

    at(O::bb, O::be) = -i * half_b;
    at(O::bb, O::eb) = i * half_b;
    at(O::bb, O::ee) = p.gamma_b;

    at(O::ee, O::ae) = i * half_a;
    at(O::ee, O::ea) = -i * half_a;
    at(O::ee, O::be) = i * half_b;
    at(O::ee, O::eb) = -i * half_b;
    at(O::ee, O::ee) = -p.gamma();

    // coherences
    at(O::ab, O::eb) = i * half_a;
    at(O::ab, O::ae) = -i * half_b;
    at(O::ab, O::ab) = -i * (p.delta_a - p.delta_b);

    at(O::ae, O::ee) = i * half_a;
    at(O::ae, O::aa) = -i * half_a;
    at(O::ae, O::ab) = -i * half_b;
    at(O::ae, O::ae) = -(half_gamma + i * p.delta_a);

    at(O::be, O::ba) = -i * half_a;
    at(O::be, O::ee) = i * half_b;
    at(O::be, O::bb) = -i * half_b;
    at(O::be, O::be) = -(half_gamma + i * p.delta_b);

    // d<sigma_kj>/dt = conj(d<sigma_jk>/dt)
    for (O row : {O::ab, O::ae, O::be}) {
        for (O col : all_operators) {
            at(adjoint(row), adjoint(col)) = std::conj(at(row, col));
        }
    }

    return BlochGenerator(m, p);
}

/// Stationary moments alpha_jk = <sigma_jk>_ss in OperatorIndex order.
class SteadyState
{
public:
    explicit SteadyState(const Vector9c& alpha) : alpha_(alpha) {}

    const Vector9c& vector() const { return alpha_; }

    complex operator()(OperatorIndex op) const { return alpha_(to_index(op)); }
    complex operator()(Level j, Level k) const
    {
        return alpha_(to_index(operator_of(j, k)));
    }

    double excited_population() const
    {
        return alpha_(to_index(OperatorIndex::ee)).real();
    }

    /// rho with rho_kj = alpha_jk.
    Matrix3c density_matrix() const
    {
        Matrix3c rho;
        for (OperatorIndex op : all_operators) {
            const auto [j, k] = levels_of(op);
            rho(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
                (*this)(op);
        }
        return rho;
    }

private:
    Vector9c alpha_;
};

/**
 * Solves M alpha = 0 with Tr = 1 by replacing the sigma_ee row with the trace
 * row. Throws non_unique_steady_state when the second-smallest singular value
 * of M is below 1e-10 ||M||.
 */
inline SteadyState solve_steady_state(const Matrix9c& m)
{
    const Eigen::JacobiSVD<Matrix9c> svd(m);
    const auto& sv = svd.singularValues();
    const double norm = sv(0);
    if (norm == 0.0 || sv(operator_count - 2) < 1e-10 * norm) {
        throw non_unique_steady_state(
            "generator null space has dimension > 1");
    }

    Matrix9c a = m;
    a.row(to_index(OperatorIndex::ee)) = trace_row();
    Vector9c rhs = Vector9c::Zero();
    rhs(to_index(OperatorIndex::ee)) = 1.0;
    Vector9c alpha = a.partialPivLu().solve(rhs);

    // enforce alpha_jk = conj(alpha_kj) exactly
    Vector9c sym;
    for (OperatorIndex op : all_operators) {
        sym(to_index(op)) =
            0.5 * (alpha(to_index(op)) + std::conj(alpha(to_index(adjoint(op)))));
    }

    const double residual = (m * sym).norm();
    if (!(residual < 1e-10 * std::max(1.0, norm))) {
        throw non_unique_steady_state("steady-state residual " +
                                      detail::show(residual));
    }
    return SteadyState(sym);
}

inline SteadyState solve_steady_state(const BlochGenerator& gen)
{
    return solve_steady_state(gen.matrix());
}

inline SteadyState solve_steady_state(const LambdaParams& p)
{
    return solve_steady_state(build_bloch_generator(p));
}

} // namespace lcpt
