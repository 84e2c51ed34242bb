#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace lcpt {

namespace detail {
/// %g formatting for error messages; std::to_string hides small values.
inline std::string show(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}
} // namespace detail

/// Base class of every error raised by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

class invalid_params : public error
{
public:
    explicit invalid_params(const std::string& what)
        : error("invalid parameters: " + what)
    {
    }
};

/// The generator has a null space of dimension > 1 (e.g. no driving at all).
class non_unique_steady_state : public error
{
public:
    explicit non_unique_steady_state(const std::string& what)
        : error("non-unique steady state: " + what)
    {
    }
};

class propagation_diverged : public error
{
public:
    explicit propagation_diverged(const std::string& what)
        : error("propagation diverged: " + what)
    {
    }
};

class singular_resolvent : public error
{
public:
    explicit singular_resolvent(const std::string& what)
        : error("singular resolvent: " + what)
    {
    }
};

/// |alpha_phi| is too small to normalize a CHD quantity.
class degenerate_quadrature : public error
{
public:
    explicit degenerate_quadrature(const std::string& what)
        : error("degenerate quadrature: " + what)
    {
    }
};

/// alpha_ee vanishes (exact coherent population trapping).
class vanishing_excitation : public error
{
public:
    explicit vanishing_excitation(const std::string& what)
        : error("vanishing excitation: " + what)
    {
    }
};

class step_too_large : public error
{
public:
    explicit step_too_large(const std::string& what)
        : error("integration step too large: " + what)
    {
    }
};

} // namespace lcpt
