#include "dzc/correlation.hpp"

#include <algorithm>
#include <numeric>

#include "dzc/error.hpp"
#include "fft.hpp"

namespace dzc {

namespace {

void require_same_length(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.empty()) throw Error(ErrorCode::InvalidArgument, "correlation of empty sequences");
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "template and received lengths differ");
}

ComplexSequence xcorr_direct(std::span<const Complex> t, std::span<const Complex> r) {
    const std::size_t n = t.size();
    ComplexSequence values(n);
    for (std::size_t lag = 0; lag < n; ++lag) {
        Complex acc{};
        for (std::size_t k = 0; k < n; ++k) acc += std::conj(t[k]) * r[(k + lag) % n];
        values[lag] = acc;
    }
    return values;
}

ComplexSequence xcorr_fast(std::span<const Complex> t, std::span<const Complex> r) {
    ComplexSequence spec_t = detail::fft(t);
    const ComplexSequence spec_r = detail::fft(r);
    for (std::size_t i = 0; i < spec_t.size(); ++i) spec_t[i] = std::conj(spec_t[i]) * spec_r[i];
    return detail::ifft(spec_t);
}

}  // namespace

CorrelationResult make_correlation_result(ComplexSequence values) {
    CorrelationResult result;
    result.values = std::move(values);
    for (std::size_t i = 0; i < result.values.size(); ++i) {
        const double mag = std::abs(result.values[i]);
        if (mag > result.peak_magnitude || i == 0) {
            result.peak_magnitude = mag;
            result.peak_index = i;
        }
    }
    return result;
}

CorrelationResult circular_xcorr(std::span<const Complex> templ, std::span<const Complex> received,
                                 CorrelationMethod method) {
    require_same_length(templ, received);
    return make_correlation_result(method == CorrelationMethod::Fast ? xcorr_fast(templ, received)
                                                                     : xcorr_direct(templ, received));
}

CorrelationResult diff_sliding_corr(std::span<const Complex> templ, std::span<const Complex> received,
                                    std::size_t m, CorrelationMethod method) {
    require_same_length(templ, received);
    const std::size_t n = templ.size();
    if (m < 1 || m >= n) throw Error(ErrorCode::OutOfRange, "differential lag m must be in [1, N)");

    if (method == CorrelationMethod::Direct) {
        ComplexSequence values(n);
        for (std::size_t lag = 0; lag < n; ++lag) {
            Complex acc{};
            for (std::size_t k = 0; k < n; ++k) {
                acc += std::conj(templ[k]) * templ[(k + m) % n] * received[(k + lag) % n] *
                       std::conj(received[(k + lag + m) % n]);
            }
            values[lag] = acc;
        }
        return make_correlation_result(std::move(values));
    }

    // conj(t[k]) t[k+m] is itself a code; correlate it against y[j] conj(y[j+m]).
    ComplexSequence dt(n), dy(n);
    for (std::size_t k = 0; k < n; ++k) {
        dt[k] = templ[k] * std::conj(templ[(k + m) % n]);
        dy[k] = received[k] * std::conj(received[(k + m) % n]);
    }
    return make_correlation_result(xcorr_fast(dt, dy));
}

CorrelationResult multi_code_scan(const SequenceSpec& template_spec, std::span<const Complex> received) {
    template_spec.validate();
    if (received.size() != static_cast<std::size_t>(template_spec.n))
        throw Error(ErrorCode::LengthMismatch, "received length must equal the template length N");
    const ComplexSequence templ = code_stream(template_spec, 0, received.size());
    return diff_sliding_corr(templ, received, 1);
}

std::vector<std::size_t> correlation_peaks(const CorrelationResult& result, std::size_t count) {
    const std::size_t n = result.values.size();
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < n; ++i) {
        const double here = std::abs(result.values[i]);
        const double left = std::abs(result.values[(i + n - 1) % n]);
        const double right = std::abs(result.values[(i + 1) % n]);
        if (n < 3 || (here > left && here >= right)) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(result.values[a]) > std::abs(result.values[b]);
    });
    if (peaks.size() > count) peaks.resize(count);
    return peaks;
}

}  // namespace dzc
