#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "fedvote/data/dataset.hpp"
#include "fedvote/error.hpp"
#include "fedvote/models/learner.hpp"
#include "fedvote/numerics/rng.hpp"

namespace fedvote {

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 20;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    // learning_rate 0 is accepted: it turns training into a no-op pass.
    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw ArgumentError("learning_rate must be a finite number >= 0");
        }
        if (epochs < 1) throw ArgumentError("epochs must be >= 1");
        if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    }
};

struct TrainLog {
    std::vector<double> epoch_loss; // sample-weighted mean of the mini-batch losses seen in each epoch
};

/// Mini-batch SGD on the mean cross-entropy: each epoch reshuffles the
/// training set and steps theta <- theta - lr * grad once per batch.
inline BaseLearner train_local(const BaseLearner& model, const Dataset& train, const TrainConfig& cfg,
                               TrainLog* log = nullptr) {
    cfg.validate();
    if (train.empty()) throw ArgumentError("train_local on an empty dataset");
    const Architecture& arch = model.architecture();
    if (train.feature_shape() != arch.input_shape) {
        throw ShapeError("dataset samples " + shape_str(train.feature_shape()) + " do not match model input " +
                         shape_str(arch.input_shape));
    }
    if (train.num_classes() != arch.num_classes) {
        throw CompatibilityError("dataset has " + std::to_string(train.num_classes()) + " classes, model has " +
                                 std::to_string(arch.num_classes));
    }

    RngStream rng(cfg.seed, stream_id("train/shuffle"));
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> theta = model.params().values.data();
    const std::size_t n_params = theta.size();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(end));
            const Dataset batch = train.subset(idx);
            const BaseLearner current(arch, ParameterVector{arch.kind, Tensor({theta.size()}, theta)});
            const auto lg = loss_and_gradient(current, batch.features(), batch.labels());
            epoch_loss += lg.loss * static_cast<double>(idx.size());
            const auto g = lg.grad.values.values();
            for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg.learning_rate * g[i];
        }
        if (log) log->epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return BaseLearner(arch, ParameterVector{arch.kind, Tensor(Shape{n_params}, std::move(theta))});
}

/// Fraction of samples whose argmax prediction equals the label.
inline double accuracy(const BaseLearner& model, const Dataset& d) {
    if (d.empty()) throw ArgumentError("accuracy on an empty dataset");
    const auto pred = predict(model, d.features());
    std::size_t hit = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == d.labels()[i];
    return static_cast<double>(hit) / static_cast<double>(d.size());
}

} // namespace fedvote
