#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dzc/resample.hpp"
#include "dzc/types.hpp"

namespace dzc {

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct ChannelSpec {
    double tau_samples = 0.0;
    double delta = 0.0;  ///< time compression, positive when the path shortens
    double nu = 0.0;     ///< carrier offset, cycles/sample
    double theta = 0.0;
    double alpha = 1.0;
    double snr_db = kNoNoise;
    std::uint64_t seed = 0;

    void validate() const;
};

/// How the transmitted sequence is extended beyond its samples.
enum class Boundary {
    Periodic,  ///< x is one period of an endlessly repeated signal
    Linear,    ///< x is a finite record; reads must stay inside it
};

struct ChannelOptions {
    std::size_t output_length = 0;  ///< 0: same as the input
    Boundary boundary = Boundary::Periodic;
    ResamplerConfig resampler{};
};

ComplexSequence apply_channel_fixed(std::span<const Complex> x, const ChannelSpec& spec,
                                    const ChannelOptions& options = {});

struct MotionProfile {
    std::function<double(double)> velocity_fn;  ///< m/s at a receive sample index, positive closing
    Physical phys{};
    double tau0_samples = 0.0;  ///< delay at sample 0

    void validate() const;
};

/// Maps receive time to emission time for a motion profile. Integrates 1 + v/c.
class MotionWarp {
public:
    MotionWarp(const MotionProfile& motion, std::size_t length);

    /// Emission time (samples) of the signal received at time t, 0 <= t <= length.
    double source_time(double t) const;
    /// Integral of v/c from 0 to t, in samples.
    double excess(double t) const;
    /// Propagation delay in samples at receive time t.
    double delay(double t) const { return t - source_time(t); }

private:
    MotionProfile motion_;
    std::vector<double> cumulative_;  // excess(k) at integer k
};

ComplexSequence apply_channel_moving(std::span<const Complex> x, const MotionProfile& motion,
                                     double theta, double alpha, double snr_db, std::uint64_t seed,
                                     const ChannelOptions& options = {});

double mean_power(std::span<const Complex> x);

ComplexSequence add_awgn(std::span<const Complex> x, double snr_db, std::uint64_t seed);

}  // namespace dzc
