#include "dzc/resample.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "dzc/error.hpp"
#include "fft.hpp"

namespace dzc {

namespace {

constexpr int kWindowOversample = 512;

// Kaiser window sampled on [0, H] at kWindowOversample points per unit.
class KaiserTable {
public:
    KaiserTable(int half_width, double beta) : half_width_(half_width) {
        const std::size_t count = static_cast<std::size_t>(half_width) * kWindowOversample + 2;
        values_.resize(count, 0.0);
        const double norm = std::cyl_bessel_i(0.0, beta);
        for (std::size_t i = 0; i + 1 < count; ++i) {
            const double u = static_cast<double>(i) / kWindowOversample / half_width;
            if (u <= 1.0) values_[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - u * u)) / norm;
        }
    }

    double operator()(double u) const {
        u = std::abs(u);
        if (u >= half_width_) return 0.0;
        const double x = u * kWindowOversample;
        const auto i = static_cast<std::size_t>(x);
        const double f = x - static_cast<double>(i);
        return values_[i] + f * (values_[i + 1] - values_[i]);
    }

private:
    int half_width_;
    std::vector<double> values_;
};

const KaiserTable& kaiser_table(int half_width, double beta) {
    static std::mutex mutex;
    static std::map<std::pair<int, double>, std::unique_ptr<KaiserTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{half_width, beta}];
    if (!slot) slot = std::make_unique<KaiserTable>(half_width, beta);
    return *slot;
}

Complex sample_or_zero(std::span<const Complex> x, std::int64_t n) {
    return (n >= 0 && n < static_cast<std::int64_t>(x.size())) ? x[static_cast<std::size_t>(n)] : Complex{};
}

Complex interpolate_sinc(std::span<const Complex> x, double t, const ResamplerConfig& cfg,
                         const KaiserTable& window) {
    const double base = std::floor(t);
    const auto n0 = static_cast<std::int64_t>(base);
    const double frac = t - base;
    if (frac == 0.0) return sample_or_zero(x, n0);
    // sin(pi (t - n)) alternates sign with n, so one sine serves every tap.
    const double s = std::sin(std::numbers::pi * frac) / std::numbers::pi;
    const std::int64_t lo = std::max<std::int64_t>(n0 - cfg.half_width + 1, 0);
    const std::int64_t hi = std::min<std::int64_t>(n0 + cfg.half_width, static_cast<std::int64_t>(x.size()) - 1);
    Complex acc{};
    for (std::int64_t n = lo; n <= hi; ++n) {
        const double u = t - static_cast<double>(n);
        const double sign = ((n0 - n) & 1) ? -1.0 : 1.0;
        acc += x[static_cast<std::size_t>(n)] * (sign * s / u * window(u));
    }
    return acc;
}

Complex interpolate_linear(std::span<const Complex> x, double t) {
    const double base = std::floor(t);
    const auto n0 = static_cast<std::int64_t>(base);
    const double frac = t - base;
    if (frac == 0.0) return sample_or_zero(x, n0);
    return sample_or_zero(x, n0) * (1.0 - frac) + sample_or_zero(x, n0 + 1) * frac;
}

}  // namespace

void ResamplerConfig::validate() const {
    if (half_width < 1 || half_width > 4096) throw Error(ErrorCode::InvalidArgument, "resampler half_width must be in [1, 4096]");
    if (!(kaiser_beta >= 0.0) || !std::isfinite(kaiser_beta))
        throw Error(ErrorCode::InvalidArgument, "kaiser_beta must be finite and nonnegative");
}

Complex interpolate_at(std::span<const Complex> x, double position, const ResamplerConfig& cfg) {
    if (!std::isfinite(position)) throw Error(ErrorCode::InvalidArgument, "interpolation position must be finite");
    if (cfg.method == Interpolation::Linear) return interpolate_linear(x, position);
    cfg.validate();
    return interpolate_sinc(x, position, cfg, kaiser_table(cfg.half_width, cfg.kaiser_beta));
}

ComplexSequence interpolate(std::span<const Complex> x, std::span<const double> positions,
                            const ResamplerConfig& cfg) {
    cfg.validate();
    ComplexSequence out(positions.size());
    if (cfg.method == Interpolation::Linear) {
        for (std::size_t k = 0; k < positions.size(); ++k) out[k] = interpolate_linear(x, positions[k]);
        return out;
    }
    const KaiserTable& window = kaiser_table(cfg.half_width, cfg.kaiser_beta);
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (!std::isfinite(positions[k])) throw Error(ErrorCode::InvalidArgument, "interpolation position must be finite");
        out[k] = interpolate_sinc(x, positions[k], cfg, window);
    }
    return out;
}

ComplexSequence resample(std::span<const Complex> x, double ratio, const ResamplerConfig& cfg) {
    if (!(ratio > 0.95 && ratio < 1.05)) throw Error(ErrorCode::OutOfRange, "resample ratio must lie in (0.95, 1.05)");
    const auto length = static_cast<std::size_t>(std::floor(static_cast<double>(x.size()) * ratio));
    std::vector<double> positions(length);
    for (std::size_t k = 0; k < length; ++k) positions[k] = static_cast<double>(k) / ratio;
    return interpolate(x, positions, cfg);
}

PeriodicInterpolator::PeriodicInterpolator(std::span<const Complex> period)
    : samples_(period.begin(), period.end()) {
    if (samples_.empty()) throw Error(ErrorCode::InvalidArgument, "periodic interpolator needs at least one sample");
    spectrum_ = detail::fft(samples_);
}

Complex PeriodicInterpolator::at(double t) const {
    if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "interpolation position must be finite");
    const auto p = static_cast<std::int64_t>(samples_.size());
    const double pd = static_cast<double>(p);
    double r = std::fmod(t, pd);
    if (r < 0.0) r += pd;
    if (r >= pd) r -= pd;
    if (r == std::floor(r)) return samples_[static_cast<std::size_t>(r) % samples_.size()];

    // Symmetric band -(P-1)/2..(P-1)/2; for even P the Nyquist bin is split into a cosine.
    const std::int64_t half = (p - 1) / 2;
    const double w = 2.0 * std::numbers::pi * r / pd;
    const Complex step = std::polar(1.0, w);
    Complex rot = std::polar(1.0, -w * static_cast<double>(half));
    Complex acc{};
    for (std::int64_t m = -half; m <= half; ++m) {
        acc += spectrum_[static_cast<std::size_t>((m + p) % p)] * rot;
        rot *= step;
    }
    if (p % 2 == 0) acc += spectrum_[static_cast<std::size_t>(p / 2)] * std::cos(std::numbers::pi * r);
    return acc / pd;
}

}  // namespace dzc
