#pragma once

#include <span>

#include "dzc/types.hpp"

namespace dzc::detail {

/// Unnormalized forward DFT: X[m] = sum_k x[k] exp(-i 2 pi m k / L).
ComplexSequence fft(std::span<const Complex> x);
/// Inverse including the 1/L factor.
ComplexSequence ifft(std::span<const Complex> x);

}  // namespace dzc::detail
