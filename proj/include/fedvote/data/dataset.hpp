#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fedvote/error.hpp"
#include "fedvote/numerics/tensor.hpp"

namespace fedvote {

using Label = std::uint16_t;

/// Ordered, unique class names. Index i in a label vector refers to names()[i].
class LabelSpace {
public:
    LabelSpace() : LabelSpace(std::vector<std::string>{"glioma", "meningioma", "pituitary", "notumor"}) {}

    explicit LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
        if (names_.size() < 2) throw ArgumentError("label space needs at least 2 classes");
        if (names_.size() > 65535) throw ArgumentError("label space too large for 16-bit labels");
        std::set<std::string> seen(names_.begin(), names_.end());
        if (seen.size() != names_.size()) throw ArgumentError("duplicate class name in label space");
    }

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::string& name(std::size_t i) const { return names_.at(i); }

    friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

private:
    std::vector<std::string> names_;
};

/// Labeled samples: features is [m, feature_shape...], one label per sample.
class Dataset {
public:
    Dataset() : Dataset(Tensor({0, 1}), {}, LabelSpace{}) {}

    Dataset(Tensor features, std::vector<Label> labels, LabelSpace label_space)
        : features_(std::move(features)), labels_(std::move(labels)), label_space_(std::move(label_space)) {
        if (features_.rank() < 2) {
            throw ShapeError("dataset features need a leading sample axis, got " + shape_str(features_.shape()));
        }
        if (features_.dim(0) != labels_.size()) {
            throw ShapeError("dataset has " + std::to_string(features_.dim(0)) + " feature rows but " +
                             std::to_string(labels_.size()) + " labels");
        }
        for (Label l : labels_) {
            if (l >= label_space_.size()) {
                throw ArgumentError("label " + std::to_string(l) + " outside label space of size " +
                                    std::to_string(label_space_.size()));
            }
        }
    }

    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    std::size_t num_classes() const noexcept { return label_space_.size(); }

    const Tensor& features() const noexcept { return features_; }
    const std::vector<Label>& labels() const noexcept { return labels_; }
    const LabelSpace& label_space() const noexcept { return label_space_; }

    /// Per-sample extents (features shape without the sample axis).
    Shape feature_shape() const { return Shape(features_.shape().begin() + 1, features_.shape().end()); }
    std::size_t feature_size() const { return features_.row_size(); }

    std::vector<std::size_t> class_counts() const {
        std::vector<std::size_t> counts(num_classes(), 0);
        for (Label l : labels_) ++counts[l];
        return counts;
    }

    /// New dataset holding the given samples, in the given order.
    Dataset subset(const std::vector<std::size_t>& indices) const {
        const std::size_t row = feature_size();
        std::vector<double> data;
        data.reserve(indices.size() * row);
        std::vector<Label> labels;
        labels.reserve(indices.size());
        for (std::size_t i : indices) {
            if (i >= size()) throw ArgumentError("subset index " + std::to_string(i) + " out of range");
            const auto r = features_.row(i);
            data.insert(data.end(), r.begin(), r.end());
            labels.push_back(labels_[i]);
        }
        Shape shape = features_.shape();
        shape[0] = indices.size();
        return Dataset(Tensor(std::move(shape), std::move(data)), std::move(labels), label_space_);
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    Tensor features_;
    std::vector<Label> labels_;
    LabelSpace label_space_;
};

/// Sample indices grouped by class, in order of appearance.
inline std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& d) {
    std::vector<std::vector<std::size_t>> out(d.num_classes());
    for (std::size_t i = 0; i < d.size(); ++i) out[d.labels()[i]].push_back(i);
    return out;
}

/// Concatenation of datasets sharing feature shape and label space.
inline Dataset concat(const std::vector<Dataset>& parts) {
    if (parts.empty()) throw ArgumentError("concat of zero datasets");
    const Shape fshape = parts.front().feature_shape();
    std::vector<double> data;
    std::vector<Label> labels;
    for (const auto& p : parts) {
        if (p.feature_shape() != fshape || !(p.label_space() == parts.front().label_space())) {
            throw CompatibilityError("concat of datasets with different feature shapes or label spaces");
        }
        data.insert(data.end(), p.features().values().begin(), p.features().values().end());
        labels.insert(labels.end(), p.labels().begin(), p.labels().end());
    }
    Shape shape{labels.size()};
    shape.insert(shape.end(), fshape.begin(), fshape.end());
    return Dataset(Tensor(std::move(shape), std::move(data)), std::move(labels), parts.front().label_space());
}

} // namespace fedvote
