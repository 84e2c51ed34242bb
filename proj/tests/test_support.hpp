#pragma once

#include <cstdint>

#include <lcpt/oracle.hpp>

namespace lcpt::test_support {

using oracle::random_params;

inline constexpr std::uint64_t acceptance_seed = 20201015;

} // namespace lcpt::test_support
