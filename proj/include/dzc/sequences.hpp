#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "dzc/types.hpp"

namespace dzc {

enum class CodeKind { ZC, DZC };

const char* code_kind_name(CodeKind kind) noexcept;
CodeKind parse_code_kind(const std::string& text);

struct SequenceSpec {
    int n = 0;
    int m = 1;
    CodeKind kind = CodeKind::DZC;

    /// Throws InvalidArgument unless N >= 2, 0 < M < N and gcd(M, N) = 1.
    void validate() const;
};

/// Phase of symbol k, reduced to [0, 2pi). k may be negative or far beyond N.
double zc_phase(int n, int m, std::int64_t k);
double dzc_phase(int n, int m, std::int64_t k);

ComplexSequence zc_sequence(const SequenceSpec& spec);
ComplexSequence dzc_sequence(const SequenceSpec& spec, std::size_t length);

std::int64_t dzc_period(const SequenceSpec& spec);

/// N for ZC, the DZC period otherwise.
std::int64_t code_period(const SequenceSpec& spec);

/// Symbol k of the periodically emitted code (any integer k).
Complex code_symbol(const SequenceSpec& spec, std::int64_t k);

/// Symbols first, first+1, ..., first+length-1 of the emitted stream.
ComplexSequence code_stream(const SequenceSpec& spec, std::int64_t first, std::size_t length);

/// out[k] = conj(seq[k]) * seq[(k + step) mod L].
ComplexSequence differential_decode(std::span<const Complex> seq, std::size_t step);

}  // namespace dzc
