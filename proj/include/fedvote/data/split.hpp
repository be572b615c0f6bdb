#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fedvote/data/dataset.hpp"
#include "fedvote/error.hpp"
#include "fedvote/numerics/rng.hpp"

namespace fedvote {

/// Number of samples of a class of size `count` that go to the training side.
/// The small epsilon keeps products like 0.29 * 100 from flooring to 28.
inline std::size_t train_count(std::size_t count, double train_fraction) {
    return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(count) + 1e-9));
}

/// Per-class floor(fraction * count) to train, remainder to test, shuffled within class.
/// Both outputs are class-major, in shuffled order within each class.
inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction, RngStream& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ArgumentError("train_fraction must lie in (0, 1), got " + std::to_string(train_fraction));
    }
    auto groups = indices_by_class(d);
    std::vector<std::size_t> train, test;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        auto& g = groups[c];
        if (g.empty()) throw ArgumentError("class '" + d.label_space().name(c) + "' has no samples");
        rng.shuffle(std::span<std::size_t>(g));
        const std::size_t k = train_count(g.size(), train_fraction);
        train.insert(train.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k));
        test.insert(test.end(), g.begin() + static_cast<std::ptrdiff_t>(k), g.end());
    }
    return {d.subset(train), d.subset(test)};
}

struct Partition {
    std::vector<Dataset> client_shards;

    std::size_t num_clients() const noexcept { return client_shards.size(); }
};

/// Stratified IID partition: each class is shuffled, then dealt round-robin.
/// The deal pointer carries over from one class to the next so total shard
/// sizes also stay within one of each other where the counts allow.
inline Partition partition_clients(const Dataset& d, std::size_t num_clients, RngStream& rng) {
    if (num_clients < 1) throw ArgumentError("client count must be >= 1");
    if (d.size() < num_clients) {
        throw ArgumentError("cannot deal " + std::to_string(d.size()) + " samples to " +
                            std::to_string(num_clients) + " clients");
    }
    auto groups = indices_by_class(d);
    std::vector<std::vector<std::size_t>> shards(num_clients);
    std::size_t next = 0;
    for (auto& g : groups) {
        rng.shuffle(std::span<std::size_t>(g));
        for (std::size_t i : g) {
            shards[next].push_back(i);
            next = (next + 1) % num_clients;
        }
    }
    Partition p;
    p.client_shards.reserve(num_clients);
    for (const auto& s : shards) p.client_shards.push_back(d.subset(s));
    return p;
}

} // namespace fedvote
