#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fedvote/error.hpp"

namespace fedvote {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

/// Dense row-major array of doubles.
///
/// Construction validates that the extents match the payload length and that
/// every value is finite; a Tensor holding NaN or Inf cannot exist.
class Tensor {
public:
    Tensor() : shape_{0} {}

    explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_size(shape_) != data_.size()) {
            throw ShapeError("extents " + shape_str(shape_) + " need " + std::to_string(shape_size(shape_)) +
                             " values, got " + std::to_string(data_.size()));
        }
        for (std::size_t i = 0; i < data_.size(); ++i) {
            if (!std::isfinite(data_[i])) {
                throw ArgumentError("non-finite tensor value at flat index " + std::to_string(i));
            }
        }
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor filled(Shape shape, double value) {
        std::vector<double> data(shape_size(shape), value);
        return Tensor(std::move(shape), std::move(data));
    }

    /// 1-D tensor from a list of values.
    static Tensor vector(std::vector<double> values) {
        Shape shape{values.size()};
        return Tensor(std::move(shape), std::move(values));
    }

    /// 2-D tensor from nested rows; all rows must have equal length.
    static Tensor matrix(const std::vector<std::vector<double>>& rows) {
        const std::size_t cols = rows.empty() ? 0 : rows.front().size();
        std::vector<double> data;
        data.reserve(rows.size() * cols);
        for (const auto& r : rows) {
            if (r.size() != cols) throw ShapeError("ragged matrix rows");
            data.insert(data.end(), r.begin(), r.end());
        }
        return Tensor({rows.size(), cols}, std::move(data));
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }

    /// Number of values per leading-axis entry (per sample for a batch).
    std::size_t row_size() const {
        if (shape_.empty()) return 1;
        std::size_t n = 1;
        for (std::size_t i = 1; i < shape_.size(); ++i) n *= shape_[i];
        return n;
    }

    std::span<const double> row(std::size_t i) const {
        const std::size_t n = row_size();
        return std::span<const double>(data_).subspan(i * n, n);
    }

    Tensor reshaped(Shape shape) const {
        if (shape_size(shape) != data_.size()) {
            throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
        }
        Tensor out = *this;
        out.shape_ = std::move(shape);
        return out;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

} // namespace fedvote
