#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedvote/error.hpp"
#include "fedvote/io/binary.hpp"
#include "fedvote/models/learner.hpp"

namespace fedvote {

// Model checkpoint directory:
//   model.json  {format_version: 1, arch_kind, input_shape, num_classes, hidden,
//                conv_filters, kernel_size, param_count, params_file}
//   params.bin  little-endian float64 parameters in flattening order

inline nlohmann::json architecture_to_json(const Architecture& a) {
    return {
        {"arch_kind", std::string(to_string(a.kind))},
        {"input_shape", a.input_shape},
        {"num_classes", a.num_classes},
        {"hidden", a.hidden},
        {"conv_filters", a.conv_filters},
        {"kernel_size", a.kernel_size},
    };
}

inline Architecture architecture_from_json(const nlohmann::json& j, const std::string& where) {
    Architecture a;
    const auto kind = io::require_field<std::string>(j, "arch_kind", where);
    const auto parsed = parse_arch_kind(kind);
    if (!parsed) throw FormatError(where + ": field 'arch_kind' has unknown value '" + kind + "'");
    a.kind = *parsed;
    a.input_shape = io::require_field<std::vector<std::size_t>>(j, "input_shape", where);
    a.num_classes = io::require_field<std::size_t>(j, "num_classes", where);
    a.hidden = io::require_field<std::size_t>(j, "hidden", where);
    a.conv_filters = io::require_field<std::size_t>(j, "conv_filters", where);
    a.kernel_size = io::require_field<std::size_t>(j, "kernel_size", where);
    try {
        a.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(where + ": invalid architecture (" + e.what() + ")");
    }
    return a;
}

inline void save_model(const BaseLearner& m, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::uint8_t> bytes;
    bytes.reserve(m.params().size() * 8);
    for (double v : m.params().values.values()) io::put_f64le(bytes, v);
    nlohmann::json manifest = architecture_to_json(m.architecture());
    manifest["format_version"] = 1;
    manifest["param_count"] = m.params().size();
    manifest["params_file"] = "params.bin";
    io::write_bytes(dir / "params.bin", bytes);
    io::write_json(dir / "model.json", manifest);
}

inline BaseLearner load_model(const std::filesystem::path& dir) {
    const auto path = dir / "model.json";
    if (!std::filesystem::exists(path)) throw FormatError("no model.json in '" + dir.string() + "'");
    const auto j = io::read_json(path);
    const std::string where = "model.json";
    if (io::require_field<int>(j, "format_version", where) != 1) {
        throw FormatError(where + ": unsupported 'format_version'");
    }
    const Architecture arch = architecture_from_json(j, where);
    const auto count = io::require_field<std::size_t>(j, "param_count", where);
    if (count != arch.param_count()) {
        throw FormatError(where + ": field 'param_count' is " + std::to_string(count) + " but the architecture has " +
                          std::to_string(arch.param_count()));
    }
    const auto file = io::require_field<std::string>(j, "params_file", where);
    const auto bytes = io::read_bytes(dir / file);
    if (bytes.size() != count * 8) {
        throw FormatError("params_file '" + file + "' holds " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(count * 8));
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        values[i] = io::get_f64le(&bytes[i * 8]);
        if (!std::isfinite(values[i])) throw FormatError("params_file holds a non-finite value at index " + std::to_string(i));
    }
    return BaseLearner(arch, ParameterVector{arch.kind, Tensor({count}, std::move(values))});
}

} // namespace fedvote
