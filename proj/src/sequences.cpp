#include "dzc/sequences.hpp"

#include <numbers>
#include <numeric>

#include "dzc/error.hpp"

namespace dzc {

namespace {

using i64 = std::int64_t;
__extension__ typedef __int128 i128;

// (a * b) mod d for 0 <= a, b < d.
i64 mul_mod(i64 a, i64 b, i64 d) { return static_cast<i64>(static_cast<i128>(a) * b % d); }

i64 pos_mod(i64 a, i64 d) {
    i64 r = a % d;
    return r < 0 ? r + d : r;
}

// Every phase here is 2*pi*r/d with r an integer residue; keeping r exact avoids
// losing the cubic term for large k.
double residue_phase(i64 r, i64 d) { return 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(d); }

}  // namespace

const char* code_kind_name(CodeKind kind) noexcept { return kind == CodeKind::ZC ? "zc" : "dzc"; }

CodeKind parse_code_kind(const std::string& text) {
    if (text == "zc" || text == "ZC") return CodeKind::ZC;
    if (text == "dzc" || text == "DZC") return CodeKind::DZC;
    throw Error(ErrorCode::InvalidArgument, "unknown code kind '" + text + "' (expected zc or dzc)");
}

void SequenceSpec::validate() const {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "N must be at least 2");
    if (m <= 0 || m >= n) throw Error(ErrorCode::InvalidArgument, "M must satisfy 0 < M < N");
    if (std::gcd(m, n) != 1) throw Error(ErrorCode::InvalidArgument, "M and N must be coprime");
}

double zc_phase(int n, int m, i64 k) {
    if (n % 2 == 1) {
        // M k (k+1) / 2 over N
        const i64 d = n;
        const i64 a = pos_mod(k, 2 * d), b = pos_mod(k + 1, 2 * d);
        i64 tri = mul_mod(a, b, 2 * d) / 2;  // k(k+1) is even, so this is exact mod d
        return residue_phase(mul_mod(pos_mod(m, d), tri % d, d), d);
    }
    const i64 d = 2 * static_cast<i64>(n);
    const i64 a = pos_mod(k, d);
    return residue_phase(mul_mod(m % d, mul_mod(a, a, d), d), d);
}

double dzc_phase(int n, int m, i64 k) {
    if (n % 2 == 1) {
        // M (k-1) k (k+1) over 6N
        const i64 d = 6 * static_cast<i64>(n);
        i64 r = mul_mod(pos_mod(k - 1, d), pos_mod(k, d), d);
        r = mul_mod(r, pos_mod(k + 1, d), d);
        return residue_phase(mul_mod(m % d, r, d), d);
    }
    // M k (2k-1) (k-1) over 12N
    const i64 d = 12 * static_cast<i64>(n);
    i64 r = mul_mod(pos_mod(k, d), pos_mod(2 * k - 1, d), d);
    r = mul_mod(r, pos_mod(k - 1, d), d);
    return residue_phase(mul_mod(m % d, r, d), d);
}

ComplexSequence zc_sequence(const SequenceSpec& spec) {
    spec.validate();
    if (spec.kind != CodeKind::ZC) throw Error(ErrorCode::InvalidArgument, "zc_sequence needs a ZC spec");
    ComplexSequence out(static_cast<std::size_t>(spec.n));
    for (int k = 0; k < spec.n; ++k) out[k] = std::polar(1.0, zc_phase(spec.n, spec.m, k));
    return out;
}

ComplexSequence dzc_sequence(const SequenceSpec& spec, std::size_t length) {
    spec.validate();
    if (spec.kind != CodeKind::DZC) throw Error(ErrorCode::InvalidArgument, "dzc_sequence needs a DZC spec");
    if (length < static_cast<std::size_t>(spec.n))
        throw Error(ErrorCode::InvalidArgument, "DZC length must be at least N");
    ComplexSequence out(length);
    for (std::size_t k = 0; k < length; ++k) out[k] = std::polar(1.0, dzc_phase(spec.n, spec.m, static_cast<i64>(k)));
    return out;
}

i64 dzc_period(const SequenceSpec& spec) {
    spec.validate();
    const i64 n = spec.n;
    if (n % 2 == 1) return n % 3 == 0 ? 3 * n : n;
    if ((2 * n - 1) % 3 == 0 || (n - 1) % 3 == 0) return 4 * n;
    return 12 * n;
}

i64 code_period(const SequenceSpec& spec) {
    return spec.kind == CodeKind::ZC ? (spec.validate(), static_cast<i64>(spec.n)) : dzc_period(spec);
}

Complex code_symbol(const SequenceSpec& spec, i64 k) {
    const double phase = spec.kind == CodeKind::ZC ? zc_phase(spec.n, spec.m, k) : dzc_phase(spec.n, spec.m, k);
    return std::polar(1.0, phase);
}

ComplexSequence code_stream(const SequenceSpec& spec, i64 first, std::size_t length) {
    spec.validate();
    ComplexSequence out(length);
    for (std::size_t j = 0; j < length; ++j) out[j] = code_symbol(spec, first + static_cast<i64>(j));
    return out;
}

ComplexSequence differential_decode(std::span<const Complex> seq, std::size_t step) {
    const std::size_t len = seq.size();
    if (len == 0) throw Error(ErrorCode::InvalidArgument, "differential_decode of an empty sequence");
    if (step == 0 || step >= len) throw Error(ErrorCode::OutOfRange, "decode step must be in [1, length)");
    ComplexSequence out(len);
    for (std::size_t k = 0; k < len; ++k) out[k] = std::conj(seq[k]) * seq[(k + step) % len];
    return out;
}

}  // namespace dzc
