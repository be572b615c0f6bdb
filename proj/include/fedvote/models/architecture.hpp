#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedvote/error.hpp"
#include "fedvote/numerics/tensor.hpp"

namespace fedvote {

enum class ArchKind { Linear, Mlp, Cnn };

inline constexpr ArchKind kAllArchKinds[] = {ArchKind::Linear, ArchKind::Mlp, ArchKind::Cnn};

inline std::string_view to_string(ArchKind k) {
    switch (k) {
    case ArchKind::Linear: return "LINEAR";
    case ArchKind::Mlp: return "MLP";
    case ArchKind::Cnn: return "CNN";
    }
    return "?";
}

inline std::optional<ArchKind> parse_arch_kind(std::string_view s) {
    if (s == "LINEAR") return ArchKind::Linear;
    if (s == "MLP") return ArchKind::Mlp;
    if (s == "CNN") return ArchKind::Cnn;
    return std::nullopt;
}

/// Offsets of each parameter block inside the flat ParameterVector.
///
/// Order is layer-major, weights before biases, row-major within a block:
///   LINEAR  W[in x N], b[N]
///   MLP     W1[in x H], b1[H], W2[H x N], b2[N]
///   CNN     K[k x k x c x F], bk[F], W[flat x N], b[N]
///           with flat = ((h-k+1)/2) * ((w-k+1)/2) * F
/// Dense layers compute x * W + b with x as a row vector.
struct ParamLayout {
    struct Block {
        std::size_t offset = 0;
        std::size_t size = 0;
        bool is_bias = false;
    };
    std::vector<Block> blocks;
    std::size_t total = 0;

    std::size_t add(std::size_t size, bool is_bias) {
        blocks.push_back({total, size, is_bias});
        total += size;
        return blocks.size() - 1;
    }
};

struct Architecture {
    ArchKind kind = ArchKind::Linear;
    Shape input_shape;            // per-sample feature extents
    std::size_t num_classes = 4;
    std::size_t hidden = 32;      // MLP hidden width
    std::size_t conv_filters = 4; // CNN filter count
    std::size_t kernel_size = 3;  // CNN square kernel side

    static Architecture linear(Shape input, std::size_t n) { return {ArchKind::Linear, std::move(input), n}; }
    static Architecture mlp(Shape input, std::size_t n, std::size_t hidden = 32) {
        Architecture a{ArchKind::Mlp, std::move(input), n};
        a.hidden = hidden;
        return a;
    }
    static Architecture cnn(Shape input, std::size_t n) { return {ArchKind::Cnn, std::move(input), n}; }

    std::size_t input_size() const { return shape_size(input_shape); }

    /// Image extents [h, w, c] the CNN sees. Rank-3 inputs are used as is,
    /// rank-2 gain one channel, rank-1 inputs of square length s*s become
    /// s x s x 1. Anything else is rejected.
    Shape image_shape() const {
        if (input_shape.size() == 3) return input_shape;
        if (input_shape.size() == 2) return {input_shape[0], input_shape[1], 1};
        if (input_shape.size() == 1) {
            const auto s = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(input_shape[0]))));
            if (s * s == input_shape[0]) return {s, s, 1};
        }
        throw ArgumentError("CNN cannot interpret input shape " + shape_str(input_shape) + " as an image");
    }

    /// Pooled feature map extents [ph, pw, F] for the CNN.
    Shape pooled_shape() const {
        const Shape img = image_shape();
        return {(img[0] - kernel_size + 1) / 2, (img[1] - kernel_size + 1) / 2, conv_filters};
    }

    void validate() const {
        if (num_classes < 2) throw ArgumentError("architecture needs >= 2 classes");
        if (input_shape.empty() || input_size() == 0) {
            throw ArgumentError("architecture input shape " + shape_str(input_shape) + " is empty");
        }
        switch (kind) {
        case ArchKind::Linear: break;
        case ArchKind::Mlp:
            if (hidden == 0) throw ArgumentError("MLP hidden width must be >= 1");
            break;
        case ArchKind::Cnn: {
            if (conv_filters == 0 || kernel_size == 0) throw ArgumentError("CNN needs >= 1 filter and kernel >= 1");
            const Shape img = image_shape();
            if (img[0] < kernel_size + 1 || img[1] < kernel_size + 1) {
                throw ArgumentError("CNN input " + shape_str(img) + " too small for a " + std::to_string(kernel_size) +
                                    "x" + std::to_string(kernel_size) + " kernel followed by 2x2 pooling");
            }
            break;
        }
        }
    }

    ParamLayout layout() const {
        validate();
        ParamLayout l;
        const std::size_t in = input_size();
        switch (kind) {
        case ArchKind::Linear:
            l.add(in * num_classes, false);
            l.add(num_classes, true);
            break;
        case ArchKind::Mlp:
            l.add(in * hidden, false);
            l.add(hidden, true);
            l.add(hidden * num_classes, false);
            l.add(num_classes, true);
            break;
        case ArchKind::Cnn: {
            const Shape img = image_shape();
            l.add(kernel_size * kernel_size * img[2] * conv_filters, false);
            l.add(conv_filters, true);
            l.add(shape_size(pooled_shape()) * num_classes, false);
            l.add(num_classes, true);
            break;
        }
        }
        return l;
    }

    std::size_t param_count() const { return layout().total; }

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

} // namespace fedvote
