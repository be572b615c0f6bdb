#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedvote/data/dataset.hpp"
#include "fedvote/error.hpp"
#include "fedvote/io/binary.hpp"

namespace fedvote {

// Dataset directory layout:
//   manifest.json  {format_version: 1, num_samples, feature_shape, dtype: "f32le",
//                   class_names, data_file, labels_file}
//   data.bin       little-endian float32 features, sample-major, row-major per sample
//   labels.bin     little-endian uint16 class indices
//
// Features are doubles in memory and float32 on disk, so a save/load cycle
// rounds each feature to the nearest float. save(load(save(d))) is byte-stable.

inline constexpr int kDatasetFormatVersion = 1;

inline void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::vector<std::uint8_t> data;
    data.reserve(d.features().size() * 4);
    const auto values = d.features().values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (std::abs(v) > static_cast<double>(std::numeric_limits<float>::max())) {
            throw ArgumentError("feature value at flat index " + std::to_string(i) + " overflows float32");
        }
        io::put_f32le(data, static_cast<float>(v));
    }
    std::vector<std::uint8_t> labels;
    labels.reserve(d.size() * 2);
    for (Label l : d.labels()) io::put_u16le(labels, l);

    nlohmann::json manifest = {
        {"format_version", kDatasetFormatVersion},
        {"num_samples", d.size()},
        {"feature_shape", d.feature_shape()},
        {"dtype", "f32le"},
        {"class_names", d.label_space().names()},
        {"data_file", "data.bin"},
        {"labels_file", "labels.bin"},
    };
    io::write_bytes(dir / "data.bin", data);
    io::write_bytes(dir / "labels.bin", labels);
    io::write_json(dir / "manifest.json", manifest);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw FormatError("no manifest.json in '" + dir.string() + "'");
    }
    const auto m = io::read_json(manifest_path);
    const std::string where = "manifest.json";

    const auto version = io::require_field<int>(m, "format_version", where);
    if (version != kDatasetFormatVersion) {
        throw FormatError(where + ": field 'format_version' is " + std::to_string(version) + ", expected 1");
    }
    const auto dtype = io::require_field<std::string>(m, "dtype", where);
    if (dtype != "f32le") throw FormatError(where + ": field 'dtype' has unknown value '" + dtype + "'");

    const auto num_samples = io::require_field<std::size_t>(m, "num_samples", where);
    if (!m.at("feature_shape").is_array()) throw FormatError(where + ": field 'feature_shape' must be an array");
    Shape feature_shape;
    for (const auto& e : m.at("feature_shape")) {
        if (!e.is_number_unsigned()) throw FormatError(where + ": field 'feature_shape' must hold nonnegative integers");
        feature_shape.push_back(e.get<std::size_t>());
    }
    if (feature_shape.empty()) throw FormatError(where + ": field 'feature_shape' is empty");
    const auto class_names = io::require_field<std::vector<std::string>>(m, "class_names", where);
    const auto data_file = io::require_field<std::string>(m, "data_file", where);
    const auto labels_file = io::require_field<std::string>(m, "labels_file", where);

    LabelSpace label_space = [&] {
        try {
            return LabelSpace(class_names);
        } catch (const ArgumentError& e) {
            throw FormatError(where + ": field 'class_names' invalid (" + e.what() + ")");
        }
    }();

    const std::size_t row = shape_size(feature_shape);
    const auto data = io::read_bytes(dir / data_file);
    if (data.size() != num_samples * row * 4) {
        throw FormatError("data_file '" + data_file + "' holds " + std::to_string(data.size()) +
                          " bytes but num_samples=" + std::to_string(num_samples) + " x feature_shape needs " +
                          std::to_string(num_samples * row * 4));
    }
    const auto label_bytes = io::read_bytes(dir / labels_file);
    if (label_bytes.size() != num_samples * 2) {
        throw FormatError("labels_file '" + labels_file + "' holds " + std::to_string(label_bytes.size()) +
                          " bytes but num_samples=" + std::to_string(num_samples) + " needs " +
                          std::to_string(num_samples * 2));
    }

    std::vector<double> features(num_samples * row);
    for (std::size_t i = 0; i < features.size(); ++i) {
        const float v = io::get_f32le(&data[i * 4]);
        if (!std::isfinite(v)) throw FormatError("data_file holds a non-finite value at flat index " + std::to_string(i));
        features[i] = v;
    }
    std::vector<Label> labels(num_samples);
    for (std::size_t i = 0; i < num_samples; ++i) {
        labels[i] = io::get_u16le(&label_bytes[i * 2]);
        if (labels[i] >= label_space.size()) {
            throw FormatError("labels_file entry " + std::to_string(i) + " is " + std::to_string(labels[i]) +
                              ", outside class_names");
        }
    }
    Shape shape{num_samples};
    shape.insert(shape.end(), feature_shape.begin(), feature_shape.end());
    return Dataset(Tensor(std::move(shape), std::move(features)), std::move(labels), std::move(label_space));
}

} // namespace fedvote
