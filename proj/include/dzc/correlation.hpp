#pragma once

#include <cstddef>
#include <span>

#include "dzc/sequences.hpp"
#include "dzc/types.hpp"

namespace dzc {

struct CorrelationResult {
    ComplexSequence values;
    std::size_t peak_index = 0;
    double peak_magnitude = 0.0;
};

enum class CorrelationMethod { Fast, Direct };

/// Wraps values and locates the peak (smallest index on ties).
CorrelationResult make_correlation_result(ComplexSequence values);

/// values[n] = sum_k conj(t[k]) * r[(k + n) mod N].
CorrelationResult circular_xcorr(std::span<const Complex> templ, std::span<const Complex> received,
                                 CorrelationMethod method = CorrelationMethod::Fast);

/// values[n] = sum_k conj(t[k]) t[k+m] r[k+n] conj(r[k+n+m]), all indices mod N.
CorrelationResult diff_sliding_corr(std::span<const Complex> templ, std::span<const Complex> received,
                                    std::size_t m = 1,
                                    CorrelationMethod method = CorrelationMethod::Fast);

/// Differential correlation of received against the first N symbols of the template code.
CorrelationResult multi_code_scan(const SequenceSpec& template_spec, std::span<const Complex> received);

/// Local maxima of |values| (circular), strongest first; ties keep the smaller index first.
std::vector<std::size_t> correlation_peaks(const CorrelationResult& result, std::size_t count);

}  // namespace dzc
