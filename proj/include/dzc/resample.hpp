#pragma once

#include <span>

#include "dzc/types.hpp"

namespace dzc {

enum class Interpolation { WindowedSinc, Linear };

struct ResamplerConfig {
    int half_width = 32;        ///< one-sided tap count of the sinc kernel
    double kaiser_beta = 8.0;
    Interpolation method = Interpolation::WindowedSinc;

    void validate() const;
};

/// Band-limited value of x at a real position; samples outside x count as zero.
Complex interpolate_at(std::span<const Complex> x, double position, const ResamplerConfig& cfg = {});

ComplexSequence interpolate(std::span<const Complex> x, std::span<const double> positions,
                            const ResamplerConfig& cfg = {});

/// output[k] = x(k / ratio), length floor(L * ratio). Requires 0.95 < ratio < 1.05.
ComplexSequence resample(std::span<const Complex> x, double ratio, const ResamplerConfig& cfg = {});

/// Exact trigonometric interpolation of one period of a periodic sequence.
class PeriodicInterpolator {
public:
    explicit PeriodicInterpolator(std::span<const Complex> period);

    Complex at(double t) const;
    std::size_t period() const { return samples_.size(); }

private:
    ComplexSequence samples_;
    ComplexSequence spectrum_;  // unnormalized DFT of one period
};

}  // namespace dzc
