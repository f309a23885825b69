#pragma once

#include <optional>
#include <string>

#include "dzc/sequences.hpp"
#include "dzc/types.hpp"

namespace dzc {

/// Sidecar metadata stored next to an IQ file as `<path>.meta`, one key=value per line.
struct IqMeta {
    Physical phys{};
    std::optional<SequenceSpec> code;
};

std::string iq_meta_path(const std::string& iq_path);

/// Little-endian float32 I/Q pairs, no header. Writes the sidecar as well.
void write_iq(const std::string& path, std::span<const Complex> samples, const IqMeta& meta);

struct IqFile {
    ComplexSequence samples;
    IqMeta meta;
};

/// Throws Io when either the data file or its sidecar is missing or malformed.
IqFile read_iq(const std::string& path);

}  // namespace dzc
