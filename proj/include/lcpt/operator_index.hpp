#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

namespace lcpt {

using complex = std::complex<double>;
using Matrix9c = Eigen::Matrix<complex, 9, 9>;
using Vector9c = Eigen::Matrix<complex, 9, 1>;
using RowVector9c = Eigen::Matrix<complex, 1, 9>;
using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;

/// Atomic levels; the value is the row/column of a 3x3 operator matrix.
enum class Level : std::size_t { e = 0, a = 1, b = 2 };

/**
 * The nine atomic operators sigma_jk = |j><k| in the order used for the
 * Bloch vector s = {ee, ae, be, ea, aa, ba, eb, ab, bb}.
 */
enum class OperatorIndex : std::size_t {
    ee = 0, ae, be, ea, aa, ba, eb, ab, bb
};

inline constexpr std::size_t operator_count = 9;

inline constexpr std::array<OperatorIndex, operator_count> all_operators = {
    OperatorIndex::ee, OperatorIndex::ae, OperatorIndex::be,
    OperatorIndex::ea, OperatorIndex::aa, OperatorIndex::ba,
    OperatorIndex::eb, OperatorIndex::ab, OperatorIndex::bb};

namespace detail {
// (j, k) pairs in vector order
inline constexpr std::array<std::pair<Level, Level>, operator_count> level_pairs = {{
    {Level::e, Level::e}, {Level::a, Level::e}, {Level::b, Level::e},
    {Level::e, Level::a}, {Level::a, Level::a}, {Level::b, Level::a},
    {Level::e, Level::b}, {Level::a, Level::b}, {Level::b, Level::b}}};

inline constexpr std::array<std::string_view, operator_count> labels = {
    "ee", "ae", "be", "ea", "aa", "ba", "eb", "ab", "bb"};
} // namespace detail

constexpr std::size_t to_index(OperatorIndex op)
{
    return static_cast<std::size_t>(op);
}

constexpr OperatorIndex operator_at(std::size_t i)
{
    return all_operators.at(i);
}

constexpr std::pair<Level, Level> levels_of(OperatorIndex op)
{
    return detail::level_pairs[to_index(op)];
}

constexpr OperatorIndex operator_of(Level j, Level k)
{
    for (std::size_t i = 0; i < operator_count; ++i) {
        if (detail::level_pairs[i].first == j &&
            detail::level_pairs[i].second == k) {
            return all_operators[i];
        }
    }
    return OperatorIndex::ee; // unreachable: the 9 pairs are exhaustive
}

/// sigma_jk -> sigma_kj
constexpr OperatorIndex adjoint(OperatorIndex op)
{
    const auto [j, k] = levels_of(op);
    return operator_of(k, j);
}

constexpr bool is_population(OperatorIndex op)
{
    return adjoint(op) == op;
}

constexpr std::string_view label(OperatorIndex op)
{
    return detail::labels[to_index(op)];
}

/// Row u with 1 on the populations; u . s = Tr(rho) for a Bloch vector.
inline RowVector9c trace_row()
{
    RowVector9c u = RowVector9c::Zero();
    u(to_index(OperatorIndex::ee)) = 1.0;
    u(to_index(OperatorIndex::aa)) = 1.0;
    u(to_index(OperatorIndex::bb)) = 1.0;
    return u;
}

/// The 3x3 matrix of sigma_jk = |j><k|.
inline Matrix3c sigma(Level j, Level k)
{
    Matrix3c m = Matrix3c::Zero();
    m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0;
    return m;
}

inline Matrix3c sigma(OperatorIndex op)
{
    const auto [j, k] = levels_of(op);
    return sigma(j, k);
}

} // namespace lcpt
