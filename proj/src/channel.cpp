#include "dzc/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "dzc/error.hpp"
#include "rng.hpp"

namespace dzc {

namespace {

constexpr double kMaxRelativeSpeed = 0.05;
constexpr int kWarpSubsteps = 4;

bool finite(double v) { return std::isfinite(v); }

// Reads the transmitted signal at real positions under the chosen boundary model.
class SignalReader {
public:
    SignalReader(std::span<const Complex> x, const ChannelOptions& options)
        : x_(x), options_(options) {
        if (x.empty()) throw Error(ErrorCode::InvalidArgument, "channel input is empty");
        options.resampler.validate();
        if (options.boundary == Boundary::Periodic) periodic_.emplace(x);
    }

    Complex operator()(double position) const {
        if (periodic_) return periodic_->at(position);
        const double last = static_cast<double>(x_.size() - 1);
        if (position < 0.0 || position > last)
            throw Error(ErrorCode::InsufficientLength, "channel input does not cover the delayed window");
        return interpolate_at(x_, position, options_.resampler);
    }

private:
    std::span<const Complex> x_;
    const ChannelOptions& options_;
    std::optional<PeriodicInterpolator> periodic_;
};

// exp(i 2 pi cycles) with the integer part of cycles removed first.
Complex rotation(double cycles) {
    return std::polar(1.0, 2.0 * std::numbers::pi * (cycles - std::round(cycles)));
}

}  // namespace

void Physical::validate() const {
    if (!(fs > 0.0) || !finite(fs)) throw Error(ErrorCode::InvalidArgument, "fs must be positive");
    if (!(c > 0.0) || !finite(c)) throw Error(ErrorCode::InvalidArgument, "c must be positive");
    if (!(fc > 0.0) || !finite(fc)) throw Error(ErrorCode::InvalidArgument, "fc must be positive");
}

void ChannelSpec::validate() const {
    if (!finite(tau_samples) || tau_samples < 0.0) throw Error(ErrorCode::InvalidArgument, "tau must be finite and nonnegative");
    if (!finite(delta) || std::abs(delta) >= kMaxRelativeSpeed) throw Error(ErrorCode::OutOfRange, "|delta| must be below 0.05");
    if (!finite(nu)) throw Error(ErrorCode::InvalidArgument, "nu must be finite");
    if (!finite(theta)) throw Error(ErrorCode::InvalidArgument, "theta must be finite");
    if (!finite(alpha) || alpha <= 0.0) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    if (std::isnan(snr_db) || snr_db == -kNoNoise) throw Error(ErrorCode::InvalidArgument, "snr_db must be a number or +inf");
}

ComplexSequence apply_channel_fixed(std::span<const Complex> x, const ChannelSpec& spec,
                                    const ChannelOptions& options) {
    spec.validate();
    const SignalReader read(x, options);
    const std::size_t length = options.output_length ? options.output_length : x.size();
    ComplexSequence out(length);
    for (std::size_t k = 0; k < length; ++k) {
        const double kd = static_cast<double>(k);
        const double position = (1.0 + spec.delta) * (kd - spec.tau_samples);
        out[k] = spec.alpha * read(position) * std::polar(1.0, spec.theta) * rotation(spec.nu * kd);
    }
    return add_awgn(out, spec.snr_db, spec.seed);
}

void MotionProfile::validate() const {
    phys.validate();
    if (!velocity_fn) throw Error(ErrorCode::InvalidArgument, "motion profile has no velocity function");
    if (!finite(tau0_samples) || tau0_samples < 0.0) throw Error(ErrorCode::InvalidArgument, "tau0 must be finite and nonnegative");
}

MotionWarp::MotionWarp(const MotionProfile& motion, std::size_t length) : motion_(motion) {
    motion_.validate();
    const double c = motion_.phys.c;
    auto ratio = [&](double t) {
        const double v = motion_.velocity_fn(t);
        if (!finite(v) || std::abs(v) >= kMaxRelativeSpeed * c)
            throw Error(ErrorCode::OutOfRange, "velocity must stay below 0.05 c");
        return v / c;
    };
    cumulative_.assign(length + 1, 0.0);
    double prev = ratio(0.0);
    for (std::size_t k = 1; k <= length; ++k) {
        double acc = 0.0;
        for (int j = 1; j <= kWarpSubsteps; ++j) {
            const double cur = ratio(static_cast<double>(k - 1) + static_cast<double>(j) / kWarpSubsteps);
            acc += 0.5 * (prev + cur) / kWarpSubsteps;
            prev = cur;
        }
        cumulative_[k] = cumulative_[k - 1] + acc;
    }
}

double MotionWarp::excess(double t) const {
    if (!(t >= 0.0) || t > static_cast<double>(cumulative_.size() - 1))
        throw Error(ErrorCode::OutOfRange, "warp time outside the simulated span");
    const auto k = static_cast<std::size_t>(std::floor(t));
    double partial = 0.0;
    const double rest = t - static_cast<double>(k);
    if (rest > 0.0) {
        // trapezoid from k to t using the same velocity function
        const double c = motion_.phys.c;
        const int steps = kWarpSubsteps;
        double prev = motion_.velocity_fn(static_cast<double>(k)) / c;
        for (int j = 1; j <= steps; ++j) {
            const double cur = motion_.velocity_fn(static_cast<double>(k) + rest * j / steps) / c;
            partial += 0.5 * (prev + cur) * rest / steps;
            prev = cur;
        }
    }
    return cumulative_[k] + partial;
}

double MotionWarp::source_time(double t) const {
    const double v0 = motion_.velocity_fn(0.0) / motion_.phys.c;
    return t + excess(t) - (1.0 + v0) * motion_.tau0_samples;
}

ComplexSequence apply_channel_moving(std::span<const Complex> x, const MotionProfile& motion,
                                     double theta, double alpha, double snr_db, std::uint64_t seed,
                                     const ChannelOptions& options) {
    ChannelSpec check;
    check.theta = theta;
    check.alpha = alpha;
    check.snr_db = snr_db;
    check.validate();
    const SignalReader read(x, options);
    const std::size_t length = options.output_length ? options.output_length : x.size();
    const MotionWarp warp(motion, length);
    const double carrier_ratio = motion.phys.fc / motion.phys.fs;
    ComplexSequence out(length);
    for (std::size_t k = 0; k < length; ++k) {
        const double kd = static_cast<double>(k);
        // carrier phase follows s(k) - s(0) - k, which is the accumulated excess
        out[k] = alpha * read(warp.source_time(kd)) * std::polar(1.0, theta) * rotation(carrier_ratio * warp.excess(kd));
    }
    return add_awgn(out, snr_db, seed);
}

double mean_power(std::span<const Complex> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (const Complex& v : x) acc += std::norm(v);
    return acc / static_cast<double>(x.size());
}

ComplexSequence add_awgn(std::span<const Complex> x, double snr_db, std::uint64_t seed) {
    if (x.empty()) throw Error(ErrorCode::InvalidArgument, "add_awgn of an empty sequence");
    if (std::isnan(snr_db) || snr_db == -kNoNoise) throw Error(ErrorCode::InvalidArgument, "snr_db must be a number or +inf");
    ComplexSequence out(x.begin(), x.end());
    if (snr_db == kNoNoise) return out;
    const double variance = mean_power(x) / std::pow(10.0, snr_db / 10.0);
    std::mt19937_64 engine(detail::mix_seed(seed));
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    for (Complex& v : out) {
        const double re = normal(engine);
        const double im = normal(engine);
        v += Complex(re, im);
    }
    return out;
}

}  // namespace dzc
