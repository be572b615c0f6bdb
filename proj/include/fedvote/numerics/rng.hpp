#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>

#include "fedvote/error.hpp"

namespace fedvote {

namespace rng_detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace rng_detail

/// 64-bit FNV-1a of a tag; used to turn readable stream names into ids.
constexpr std::uint64_t stream_id(std::string_view tag) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Sub-stream id for an indexed consumer, e.g. stream_id("train", {client, round, member}).
constexpr std::uint64_t stream_id(std::string_view tag, std::initializer_list<std::uint64_t> indices) noexcept {
    std::uint64_t h = stream_id(tag);
    for (std::uint64_t i : indices) h = rng_detail::mix64(h ^ rng_detail::mix64(i + rng_detail::kGolden));
    return h;
}

/// Counter-based random stream.
///
/// Draw k (k = 1, 2, ...) is mix64(key + k * 0x9E3779B97F4A7C15) where
/// key = mix64(seed + G) ^ mix64(stream_id + 2G) and mix64 is the SplitMix64
/// finalizer. The algorithm is frozen; test vectors live in tests/test_rng.cpp.
/// Not thread-safe: every consumer owns its own stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream),
          key_(rng_detail::mix64(seed + rng_detail::kGolden) ^
               rng_detail::mix64(stream + 2 * rng_detail::kGolden)) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return rng_detail::mix64(key_ + counter_ * rng_detail::kGolden);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; consumes two draws, keeps the cosine branch only.
    double standard_normal() noexcept {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n), unbiased (Lemire multiply-shift with rejection).
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw ArgumentError("uniform_index needs n >= 1");
        __extension__ using u128 = unsigned __int128;
        auto draw = [&] { return static_cast<u128>(next_u64()) * n; };
        u128 m = draw();
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = draw();
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Fisher-Yates, walking from the back.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace fedvote
