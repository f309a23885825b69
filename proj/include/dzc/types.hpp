#pragma once

#include <complex>
#include <vector>

namespace dzc {

using Complex = std::complex<double>;
using ComplexSequence = std::vector<Complex>;

/// Physical constants shared by the channel, estimators and harness.
struct Physical {
    double fs = 192000.0;  ///< sample rate, Hz
    double c = 345.664;    ///< speed of sound, m/s
    double fc = 20000.0;   ///< carrier frequency, Hz

    void validate() const;
    /// Meters per sample period.
    double meters_per_sample() const { return c / fs; }
};

}  // namespace dzc
