#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chd.hpp"
#include "errors.hpp"
#include "regression.hpp"

namespace lcpt {

/// N-point grid over [from, to]; symmetric grids hold exact negations.
struct FrequencyGrid
{
    double from = -8.0;
    double to = 8.0;
    std::size_t points = 2001;

    double operator[](std::size_t k) const
    {
        if (points == 1) {
            return from;
        }
        const double mid = 0.5 * (from + to);
        const double half = 0.5 * (to - from);
        const auto n = static_cast<double>(points - 1);
        return mid + half * (2.0 * static_cast<double>(k) - n) / n;
    }

    double step() const
    {
        return points > 1 ? (to - from) / static_cast<double>(points - 1) : 0.0;
    }

    std::vector<double> values() const
    {
        std::vector<double> w(points);
        for (std::size_t k = 0; k < points; ++k) {
            w[k] = (*this)[k];
        }
        return w;
    }
};

inline FrequencyGrid default_frequency_grid()
{
    return FrequencyGrid{-8.0, 8.0, 2001};
}

enum class SpectrumKind {
    Incoherent,
    ChdPositive,
    ChdNegative,
    ChdSecond,
    ChdThird,
    Squeezing
};

inline const char* to_string(SpectrumKind k)
{
    switch (k) {
    case SpectrumKind::Incoherent: return "incoherent";
    case SpectrumKind::ChdPositive: return "chd-positive";
    case SpectrumKind::ChdNegative: return "chd-negative";
    case SpectrumKind::ChdSecond: return "chd-second";
    case SpectrumKind::ChdThird: return "chd-third";
    case SpectrumKind::Squeezing: return "squeezing";
    }
    return "unknown";
}

/// Combined collection and detection efficiency in [0, 1].
class Efficiency
{
public:
    Efficiency() = default;
    explicit Efficiency(double eta) : eta_(eta)
    {
        if (!(eta >= 0.0 && eta <= 1.0)) {
            throw std::invalid_argument("efficiency must lie in [0, 1]");
        }
    }
    double value() const { return eta_; }

private:
    double eta_ = 1.0;
};

struct Spectrum
{
    std::vector<double> omega;
    std::vector<double> values;
    SpectrumKind kind = SpectrumKind::Incoherent;
    std::optional<QuadraturePhase> phi;
    /// weight of the elastic delta peak, Incoherent only; never binned
    double coherent_weight = 0.0;
    /// max |Im| of a quantity that should be real (ChdThird)
    double imaginary_residual = 0.0;
};

/**
 * Factorized (i omega - M) for repeated solves. At omega = 0 the sigma_ee
 * row is replaced by the trace row with a zero right-hand side, which is exact
 * for trace-free vectors.
 */
class Resolvent
{
public:
    Resolvent(const Matrix9c& m, double omega) : m_(m), omega_(omega)
    {
        Matrix9c a = complex(0.0, omega) * Matrix9c::Identity() - m;
        if (omega == 0.0) {
            a.row(to_index(OperatorIndex::ee)) = trace_row();
        }
        lu_.compute(a);
    }

    Vector9c solve(const Vector9c& v) const
    {
        const double scale = v.norm();
        if (scale == 0.0) {
            return Vector9c::Zero();
        }
        Vector9c rhs = v;
        if (omega_ == 0.0) {
            rhs(to_index(OperatorIndex::ee)) = 0.0;
        }
        Vector9c x = lu_.solve(rhs);
        const Vector9c r =
            complex(0.0, omega_) * x - m_ * x - v;
        if (!x.allFinite() || !(r.norm() <= 1e-8 * scale)) {
            throw singular_resolvent("residual " + detail::show(r.norm()) +
                                     " at omega = " + detail::show(omega_));
        }
        return x;
    }

private:
    Matrix9c m_;
    double omega_;
    Eigen::PartialPivLU<Matrix9c> lu_;
};

/// x with (i omega 1 - M) x = v.
inline Vector9c resolvent_solve(const Matrix9c& m, double omega,
                                const Vector9c& v)
{
    return Resolvent(m, omega).solve(v);
}

inline Vector9c resolvent_solve(const BlochGenerator& gen, double omega,
                                const Vector9c& v)
{
    return resolvent_solve(gen.matrix(), omega, v);
}

/**
 * Spectral density S(omega) of one kind, evaluated pointwise by resolvent
 * solves. The CHD and squeezing kinds are cosine transforms over tau >= 0,
 *   int_0^inf cos(w t) e^{M t} v dt = [(iw - M)^{-1} + (-iw - M)^{-1}] v / 2,
 * so they are even in omega by construction.
 */
class SpectralDensity
{
public:
    SpectralDensity(StationaryFluctuations fl, SpectrumKind kind,
                    std::optional<QuadraturePhase> phi = std::nullopt,
                    Efficiency eta = Efficiency{})
        : fl_(std::move(fl)), kind_(kind), phi_(phi), eta_(eta)
    {
        const double excited = fl_.steady.excited_population();
        const double gamma_a = fl_.params().gamma_a;
        switch (kind_) {
        case SpectrumKind::Incoherent:
            if (excited < excitation_floor) {
                throw vanishing_excitation(
                    "incoherent spectrum needs alpha_ee > 0");
            }
            prefactor_ = 1.0 / (std::numbers::pi * excited);
            break;
        case SpectrumKind::Squeezing:
            require_phase();
            prefactor_ = 2.0 * gamma_a * eta_.value();
            break;
        default: {
            require_phase();
            chd_normalization(fl_, *phi_);
            prefactor_ = gamma_a / phi_->mean_amplitude(fl_.steady);
            break;
        }
        }
    }

    SpectrumKind kind() const { return kind_; }
    const std::optional<QuadraturePhase>& phi() const { return phi_; }
    const StationaryFluctuations& fluctuations() const { return fl_; }

    double coherent_weight() const
    {
        if (kind_ != SpectrumKind::Incoherent) {
            return 0.0;
        }
        return std::norm(fl_.steady(OperatorIndex::ea)) * prefactor_;
    }

    double operator()(double omega) const
    {
        double residual = 0.0;
        return evaluate(omega, residual);
    }

    /// Also reports |Im| of the ChdThird bracket, which should vanish.
    double evaluate(double omega, double& imaginary_residual) const
    {
        using O = OperatorIndex;
        imaginary_residual = 0.0;
        if (kind_ == SpectrumKind::Incoherent) {
            const Vector9c x = resolvent_solve(fl_.matrix(), omega, fl_.second);
            return prefactor_ * x(to_index(O::ae)).real();
        }

        const Resolvent plus(fl_.matrix(), omega);
        const Resolvent minus(fl_.matrix(), -omega);
        auto cosine = [&](const Vector9c& v) -> Vector9c {
            return plus.solve(v) + minus.solve(v);
        };

        const complex r = phi_->rotation();
        const complex alpha_ae = fl_.steady(O::ae);
        auto second = [&] {
            const Vector9c d = cosine(fl_.second);
            return 2.0 * (alpha_ae * (r * d(to_index(O::ea)) +
                                      std::conj(r) * d(to_index(O::ae))))
                             .real();
        };
        auto third = [&] {
            const Vector9c d = cosine(fl_.third);
            const complex bracket = r * d(to_index(O::ea)) +
                                    std::conj(r) * d(to_index(O::ae));
            imaginary_residual = std::abs(prefactor_ * bracket.imag());
            return bracket.real();
        };

        switch (kind_) {
        case SpectrumKind::ChdSecond:
            return prefactor_ * second();
        case SpectrumKind::ChdThird:
            return prefactor_ * third();
        case SpectrumKind::ChdPositive:
            return prefactor_ * (second() + third());
        case SpectrumKind::ChdNegative: {
            const Vector9c d = cosine(fl_.second);
            return prefactor_ * 2.0 * (r * d(to_index(O::ee))).real();
        }
        case SpectrumKind::Squeezing: {
            const Vector9c d = cosine(fl_.second);
            return prefactor_ *
                   (r * r * d(to_index(O::ea)) + d(to_index(O::ae))).real();
        }
        case SpectrumKind::Incoherent:
            break;
        }
        return 0.0;
    }

private:
    void require_phase() const
    {
        if (!phi_) {
            throw std::invalid_argument(
                std::string(to_string(kind_)) + " spectrum needs a phase");
        }
    }

    StationaryFluctuations fl_;
    SpectrumKind kind_;
    std::optional<QuadraturePhase> phi_;
    Efficiency eta_;
    double prefactor_ = 0.0;
};

inline Spectrum sample(const SpectralDensity& density, const FrequencyGrid& grid)
{
    Spectrum s;
    s.kind = density.kind();
    s.phi = density.phi();
    s.coherent_weight = density.coherent_weight();
    s.omega = grid.values();
    s.values.resize(grid.points);
    for (std::size_t k = 0; k < grid.points; ++k) {
        double residual = 0.0;
        s.values[k] = density.evaluate(s.omega[k], residual);
        s.imaginary_residual = std::max(s.imaginary_residual, residual);
    }
    return s;
}

/// (1 / pi alpha_ee) Re{[(i omega - M)^{-1} <dsigma_ea ds>]_ae}
inline Spectrum incoherent_spectrum(const LambdaParams& p,
                                    const FrequencyGrid& grid =
                                        default_frequency_grid())
{
    return sample(SpectralDensity(analyze(p), SpectrumKind::Incoherent), grid);
}

enum class ChdBranch { positive, negative };

/// 4 gamma_a alpha_ee int cos(w tau) [h_phi(+-tau) - 1] dtau over tau >= 0.
inline Spectrum chd_spectrum(const LambdaParams& p, QuadraturePhase phi,
                             ChdBranch branch,
                             const FrequencyGrid& grid = default_frequency_grid())
{
    const auto kind = branch == ChdBranch::positive ? SpectrumKind::ChdPositive
                                                    : SpectrumKind::ChdNegative;
    return sample(SpectralDensity(analyze(p), kind, phi), grid);
}

/// (S^(2), S^(3)) with S^(2) + S^(3) = positive-branch CHD spectrum.
inline std::pair<Spectrum, Spectrum>
chd_spectrum_split(const LambdaParams& p, QuadraturePhase phi,
                   const FrequencyGrid& grid = default_frequency_grid())
{
    auto fl = analyze(p);
    return {sample(SpectralDensity(fl, SpectrumKind::ChdSecond, phi), grid),
            sample(SpectralDensity(fl, SpectrumKind::ChdThird, phi), grid)};
}

/// 8 gamma_a eta int cos(w tau) Re[e^{-i phi} <dsigma_ea(0) dsigma_phi(tau)>] dtau
inline Spectrum squeezing_spectrum(const LambdaParams& p, QuadraturePhase phi,
                                   Efficiency eta,
                                   const FrequencyGrid& grid =
                                       default_frequency_grid())
{
    return sample(SpectralDensity(analyze(p), SpectrumKind::Squeezing, phi, eta),
                  grid);
}

/// V_phi = Re[e^{-i phi} <dsigma_ea dsigma_phi>_ss]; negative means squeezed.
inline double variance(const StationaryFluctuations& fl, QuadraturePhase phi)
{
    return (phi.rotation() * phi.project(fl.second)).real();
}

inline double variance(const LambdaParams& p, QuadraturePhase phi)
{
    return variance(analyze(p), phi);
}

/**
 * Integral of S over the whole real line: trapezoid rule on the grid plus the
 * two tails beyond it, each mapped to u = 1/omega and integrated by
 * Gauss-Kronrod. Needs from < 0 < to.
 */
inline double integrate_spectrum(const SpectralDensity& density,
                                 const FrequencyGrid& grid)
{
    if (!(grid.from < 0.0 && grid.to > 0.0) || grid.points < 2) {
        throw std::invalid_argument(
            "integration grid must straddle omega = 0");
    }
    double inner = 0.0;
    double previous = density(grid[0]);
    for (std::size_t k = 1; k < grid.points; ++k) {
        const double current = density(grid[k]);
        inner += 0.5 * (previous + current) * (grid[k] - grid[k - 1]);
        previous = current;
    }

    using boost::math::quadrature::gauss_kronrod;
    auto tail = [&](double edge, double sign) {
        auto f = [&](double u) {
            return density(sign / u) / (u * u);
        };
        return gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0 / std::abs(edge),
                                                    8, 1e-12);
    };
    return inner + tail(grid.to, 1.0) + tail(grid.from, -1.0);
}

} // namespace lcpt
