#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <type_traits>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedvote/error.hpp"

namespace fedvote::io {

// Little-endian encoders/decoders that do not depend on host byte order.

inline void put_u16le(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}

inline void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
}

inline void put_f32le(std::vector<std::uint8_t>& out, float v) { put_u32le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_f64le(std::vector<std::uint8_t>& out, double v) { put_u64le(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint16_t get_u16le(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t get_u32le(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint64_t get_u64le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline float get_f32le(const std::uint8_t* p) { return std::bit_cast<float>(get_u32le(p)); }
inline double get_f64le(const std::uint8_t* p) { return std::bit_cast<double>(get_u64le(p)); }

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

/// Typed field lookup that reports the offending field name.
template <typename T>
T require_field(const nlohmann::json& j, const std::string& field, const std::string& where) {
    if (!j.is_object() || !j.contains(field)) throw FormatError(where + ": missing field '" + field + "'");
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!j.at(field).is_number_unsigned()) {
            throw FormatError(where + ": field '" + field + "' must be a nonnegative integer");
        }
    }
    try {
        return j.at(field).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw FormatError(where + ": field '" + field + "' has the wrong type");
    }
}

} // namespace fedvote::io
