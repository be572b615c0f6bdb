#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fedvote/data/dataset.hpp"
#include "fedvote/error.hpp"
#include "fedvote/numerics/rng.hpp"

namespace fedvote {

/// Cluster centers at pairwise distance >= separation.
///
/// With dim >= N the centers are (separation / sqrt 2) * e_k, exactly
/// `separation` apart. Otherwise they sit on an integer lattice with spacing
/// `separation` (base-b digits of k, b = smallest base with b^dim >= N).
inline std::vector<std::vector<double>> blob_centers(std::size_t num_classes, std::size_t dim, double separation) {
    std::vector<std::vector<double>> centers(num_classes, std::vector<double>(dim, 0.0));
    if (dim >= num_classes) {
        const double r = separation / std::sqrt(2.0);
        for (std::size_t k = 0; k < num_classes; ++k) centers[k][k] = r;
        return centers;
    }
    std::size_t base = 2;
    auto capacity = [&](std::size_t b) {
        std::size_t c = 1;
        for (std::size_t i = 0; i < dim && c < num_classes; ++i) c *= b;
        return c;
    };
    while (capacity(base) < num_classes) ++base;
    for (std::size_t k = 0; k < num_classes; ++k) {
        std::size_t rest = k;
        for (std::size_t i = 0; i < dim; ++i) {
            centers[k][i] = separation * static_cast<double>(rest % base);
            rest /= base;
        }
    }
    return centers;
}

/// Unit-variance Gaussian clusters, one per class, `per_class` samples each.
/// Samples are emitted class-major.
inline Dataset generate_blobs(RngStream& rng, std::size_t per_class, std::size_t dim, double separation,
                              const LabelSpace& label_space = LabelSpace{}) {
    if (per_class < 1) throw ArgumentError("per_class must be >= 1");
    if (dim < 1) throw ArgumentError("dim must be >= 1");
    if (!(separation > 0.0) || !std::isfinite(separation)) throw ArgumentError("separation must be > 0");

    const std::size_t n = label_space.size();
    const auto centers = blob_centers(n, dim, separation);
    std::vector<double> data;
    data.reserve(n * per_class * dim);
    std::vector<Label> labels;
    labels.reserve(n * per_class);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t s = 0; s < per_class; ++s) {
            for (std::size_t i = 0; i < dim; ++i) data.push_back(centers[k][i] + rng.standard_normal());
            labels.push_back(static_cast<Label>(k));
        }
    }
    return Dataset(Tensor({n * per_class, dim}, std::move(data)), std::move(labels), label_space);
}

} // namespace fedvote
