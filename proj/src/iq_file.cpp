#include "dzc/iq_file.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "dzc/error.hpp"
#include "text_util.hpp"

namespace dzc {

namespace {

std::uint32_t to_little(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
}

void put_float(std::ostream& os, float f) {
    const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(f));
    char bytes[4];
    std::memcpy(bytes, &bits, 4);
    os.write(bytes, 4);
}

}  // namespace

std::string iq_meta_path(const std::string& iq_path) { return iq_path + ".meta"; }

void write_iq(const std::string& path, std::span<const Complex> samples, const IqMeta& meta) {
    meta.phys.validate();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    for (const Complex& v : samples) {
        put_float(os, static_cast<float>(v.real()));
        put_float(os, static_cast<float>(v.imag()));
    }
    if (!os) throw Error(ErrorCode::Io, "write failed for '" + path + "'");

    std::ofstream ms(iq_meta_path(path), std::ios::trunc);
    if (!ms) throw Error(ErrorCode::Io, "cannot open '" + iq_meta_path(path) + "' for writing");
    ms << "fs=" << detail::format_double(meta.phys.fs) << '\n'
       << "fc=" << detail::format_double(meta.phys.fc) << '\n'
       << "c=" << detail::format_double(meta.phys.c) << '\n';
    if (meta.code) {
        ms << "n=" << meta.code->n << '\n'
           << "m=" << meta.code->m << '\n'
           << "kind=" << code_kind_name(meta.code->kind) << '\n';
    }
    if (!ms) throw Error(ErrorCode::Io, "write failed for '" + iq_meta_path(path) + "'");
}

IqFile read_iq(const std::string& path) {
    std::ifstream ms(iq_meta_path(path));
    if (!ms) throw Error(ErrorCode::Io, "missing sidecar '" + iq_meta_path(path) + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(ms, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::Io, "sidecar line " + std::to_string(lineno) + " is not key=value");
        kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
    }

    IqFile file;
    try {
        if (kv.count("fs")) file.meta.phys.fs = detail::parse_double(kv["fs"]);
        if (kv.count("fc")) file.meta.phys.fc = detail::parse_double(kv["fc"]);
        if (kv.count("c")) file.meta.phys.c = detail::parse_double(kv["c"]);
        file.meta.phys.validate();
        if (kv.count("n") && kv.count("m")) {
            SequenceSpec spec;
            spec.n = static_cast<int>(detail::parse_int(kv["n"]));
            spec.m = static_cast<int>(detail::parse_int(kv["m"]));
            spec.kind = kv.count("kind") ? parse_code_kind(kv["kind"]) : CodeKind::DZC;
            file.meta.code = spec;
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::Io, "bad sidecar '" + iq_meta_path(path) + "': " + e.what());
    }

    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0) throw Error(ErrorCode::Io, "'" + path + "' is not a whole number of I/Q pairs");
    file.samples.resize(bytes.size() / 8);
    for (std::size_t i = 0; i < file.samples.size(); ++i) {
        std::uint32_t re = 0, im = 0;
        std::memcpy(&re, bytes.data() + 8 * i, 4);
        std::memcpy(&im, bytes.data() + 8 * i + 4, 4);
        file.samples[i] = Complex(std::bit_cast<float>(to_little(re)), std::bit_cast<float>(to_little(im)));
    }
    return file;
}

}  // namespace dzc
