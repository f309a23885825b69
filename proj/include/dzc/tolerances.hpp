#pragma once

#include <cstddef>

namespace dzc {

struct Tolerances {
    double unit_modulus = 1e-12;
    double decode = 1e-12;
    double correlation_relative = 1e-9;  // scaled by N

    double correlation(std::size_t n) const { return correlation_relative * static_cast<double>(n); }
};

inline constexpr Tolerances kTolerances{};

}  // namespace dzc
