#include "fft.hpp"

#include <unsupported/Eigen/FFT>

namespace dzc::detail {

namespace {

Eigen::FFT<double>& engine() {
    // Eigen's FFT caches twiddles per size and is not safe to share across threads.
    thread_local Eigen::FFT<double> fft;
    return fft;
}

}  // namespace

ComplexSequence fft(std::span<const Complex> x) {
    if (x.size() < 2) return ComplexSequence(x.begin(), x.end());  // Eigen does not handle L = 1
    ComplexSequence in(x.begin(), x.end()), out;
    engine().fwd(out, in);
    return out;
}

ComplexSequence ifft(std::span<const Complex> x) {
    if (x.size() < 2) return ComplexSequence(x.begin(), x.end());
    ComplexSequence in(x.begin(), x.end()), out;
    engine().inv(out, in);
    return out;
}

}  // namespace dzc::detail
