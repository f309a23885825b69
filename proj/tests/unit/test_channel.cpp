#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dzc/channel.hpp"
#include "dzc/error.hpp"
#include "dzc/sequences.hpp"
#include "oracles.hpp"

using namespace dzc;

namespace {

ComplexSequence dzc_period_of(int n, int m = 1) {
    const SequenceSpec spec{n, m, CodeKind::DZC};
    return code_stream(spec, 0, static_cast<std::size_t>(code_period(spec)));
}

double noise_power(const ComplexSequence& noisy, const ComplexSequence& clean) {
    double acc = 0.0;
    for (std::size_t k = 0; k < noisy.size(); ++k) acc += std::norm(noisy[k] - clean[k]);
    return acc / static_cast<double>(noisy.size());
}

}  // namespace

TEST_CASE("integer delay is a circular shift") {
    const auto x = dzc_period_of(31);
    ChannelSpec ch;
    ch.tau_samples = 7;
    const auto y = apply_channel_fixed(x, ch);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(y[k] - x[(k + x.size() - 7) % x.size()]) <= 1e-12);
}

TEST_CASE("pure carrier offset rotates") {
    const ComplexSequence ones(4, Complex{1, 0});
    ChannelSpec ch;
    ch.nu = 0.25;
    const auto y = apply_channel_fixed(ones, ch);
    const Complex expect[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int k = 0; k < 4; ++k) CHECK(std::abs(y[k] - expect[k]) <= 1e-12);
}

TEST_CASE("time compression matches an independent band-limited reference") {
    const auto x = dzc_period_of(511);
    const oracle::TrigInterp ref(x);
    ChannelSpec ch;
    ch.delta = 1.0 / 345.664;
    ch.tau_samples = 12.5;
    ChannelOptions opt;
    opt.output_length = 700;
    const auto y = apply_channel_fixed(x, ch, opt);
    double worst = 0.0;
    for (std::size_t k = 0; k < y.size(); k += 3) {
        const double pos = (1.0 + ch.delta) * (static_cast<double>(k) - ch.tau_samples);
        worst = std::max(worst, std::abs(y[k] - ref.at(pos)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("gain is linear and the phase is applied") {
    const auto x = dzc_period_of(63);
    ChannelSpec a;
    a.tau_samples = 3.25;
    a.alpha = 0.7;
    a.theta = 0.4;
    ChannelSpec b = a;
    b.alpha = 1.4;
    const auto ya = apply_channel_fixed(x, a);
    const auto yb = apply_channel_fixed(x, b);
    for (std::size_t k = 0; k < ya.size(); ++k) CHECK(yb[k] == 2.0 * ya[k]);
}

TEST_CASE("channel argument checks") {
    const auto x = dzc_period_of(31);
    ChannelSpec ch;
    ch.delta = 0.05;
    CHECK_THROWS_AS(apply_channel_fixed(x, ch), Error);
    ch.delta = 0.0;
    ch.snr_db = std::nan("");
    CHECK_THROWS_AS(apply_channel_fixed(x, ch), Error);
    ChannelSpec far;
    far.tau_samples = 5;
    ChannelOptions linear;
    linear.boundary = Boundary::Linear;
    try {
        apply_channel_fixed(x, far, linear);
        FAIL("linear boundary read before the record");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InsufficientLength);
    }
}

TEST_CASE("awgn calibration and determinism") {
    const ComplexSequence x(1'000'000, Complex{1, 0});
    CHECK(add_awgn(x, kNoNoise, 3) == x);
    const auto y = add_awgn(x, 0.0, 42);
    CHECK(std::abs(noise_power(y, x) - 1.0) <= 0.01);
    CHECK(add_awgn(x, 0.0, 42) == y);
    CHECK(add_awgn(x, 0.0, 43) != y);
}

TEST_CASE("channel SNR is measured against the noiseless output") {
    ComplexSequence x = dzc_period_of(511);
    ChannelSpec clean;
    clean.tau_samples = 40.3;
    clean.alpha = 0.3;
    ChannelOptions opt;
    opt.output_length = 200'000;
    const auto ref = apply_channel_fixed(x, clean, opt);
    for (double snr : {-10.0, 0.0, 20.0}) {
        ChannelSpec noisy = clean;
        noisy.snr_db = snr;
        noisy.seed = 9;
        const auto y = apply_channel_fixed(x, noisy, opt);
        const double measured = 10.0 * std::log10(mean_power(ref) / noise_power(y, ref));
        CHECK(std::abs(measured - snr) <= 0.1);
    }
}

TEST_CASE("moving channel with no motion equals the fixed channel") {
    const auto x = dzc_period_of(127);
    MotionProfile still;
    still.velocity_fn = [](double) { return 0.0; };
    still.tau0_samples = 20.75;
    ChannelOptions opt;
    opt.output_length = 400;
    ChannelSpec ch;
    ch.tau_samples = 20.75;
    ch.theta = 1.1;
    const auto a = apply_channel_moving(x, still, 1.1, 1.0, kNoNoise, 0, opt);
    const auto b = apply_channel_fixed(x, ch, opt);
    CHECK(oracle::max_abs_diff(a, b) <= 1e-12);
}

TEST_CASE("constant velocity equals fixed compression and offset") {
    const auto x = dzc_period_of(511);
    const Physical phys{};
    for (double v : {0.5, -1.2}) {
        MotionProfile motion;
        motion.velocity_fn = [v](double) { return v; };
        motion.tau0_samples = 30.0;
        ChannelOptions opt;
        opt.output_length = 3000;
        ChannelSpec ch;
        ch.tau_samples = 30.0;
        ch.delta = v / phys.c;
        ch.nu = phys.fc * v / (phys.c * phys.fs);
        ch.theta = 0.3;
        const auto a = apply_channel_moving(x, motion, 0.3, 1.0, kNoNoise, 0, opt);
        const auto b = apply_channel_fixed(x, ch, opt);
        CHECK(oracle::max_abs_diff(a, b) <= 1e-6);
    }
}

TEST_CASE("a velocity step shows up in the carrier within one segment") {
    const Physical phys{};
    const std::size_t length = 8192, step_at = 4096, seg = 256;
    const ComplexSequence ones(64, Complex{1, 0});
    MotionProfile motion;
    motion.velocity_fn = [&](double t) { return t < static_cast<double>(step_at) ? 0.0 : 0.5; };
    ChannelOptions opt;
    opt.output_length = length;
    const auto y = apply_channel_moving(ones, motion, 0.0, 1.0, kNoNoise, 0, opt);
    const double expected = phys.fc * 0.5 / (phys.c * phys.fs);
    auto segment_frequency = [&](std::size_t s) {
        Complex acc{};
        for (std::size_t k = s; k + 1 < s + seg; ++k) acc += y[k + 1] * std::conj(y[k]);
        return std::arg(acc) / (2.0 * std::numbers::pi);
    };
    for (std::size_t s = 0; s + seg <= length; s += seg) {
        const double f = segment_frequency(s);
        if (s + seg <= step_at) CHECK(std::abs(f) <= 1e-12);
        if (s >= step_at + seg) CHECK(std::abs(f - expected) <= 1e-3 * expected);
    }
}

TEST_CASE("warp delay tracks the motion") {
    const Physical phys{};
    MotionProfile motion;
    motion.velocity_fn = [](double) { return 1.0; };
    motion.tau0_samples = 50.0;
    const MotionWarp warp(motion, 1000);
    // closing at 1 m/s: delay falls by v/c per sample around (1 + v/c)(t - tau0)
    for (double t : {0.0, 100.0, 999.5}) {
        const double delta = 1.0 / phys.c;
        CHECK(warp.delay(t) == doctest::Approx(t - (1.0 + delta) * (t - 50.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(warp.excess(1001.0), Error);
}
