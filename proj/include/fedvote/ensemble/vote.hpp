#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedvote/data/dataset.hpp"
#include "fedvote/error.hpp"

namespace fedvote {

/// Per-member vote weights: nonnegative, finite, at least one positive.
class VoteWeights {
public:
    VoteWeights() = default;

    explicit VoteWeights(std::vector<double> w) : w_(std::move(w)) {
        bool any_positive = false;
        for (double x : w_) {
            if (!(x >= 0.0) || !std::isfinite(x)) throw ArgumentError("vote weights must be finite and >= 0");
            any_positive |= x > 0.0;
        }
        if (!any_positive) throw ArgumentError("at least one vote weight must be positive");
    }

    static VoteWeights uniform(std::size_t k) { return VoteWeights(std::vector<double>(k, 1.0)); }

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& values() const noexcept { return w_; }

    friend bool operator==(const VoteWeights&, const VoteWeights&) = default;

private:
    std::vector<double> w_;
};

/// Index of the largest score; the lowest index wins ties.
inline Label argmax_lowest(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return static_cast<Label>(best);
}

/// Mode of the votes; ties resolve to the lowest class index.
inline Label majority_vote(std::span<const Label> votes) {
    if (votes.empty()) throw ArgumentError("majority_vote of an empty vote list");
    const std::size_t n = static_cast<std::size_t>(*std::max_element(votes.begin(), votes.end())) + 1;
    std::vector<double> counts(n, 0.0);
    for (Label v : votes) counts[v] += 1.0;
    return argmax_lowest(counts);
}

/// argmax over classes of the summed weights of members voting for that class;
/// ties resolve to the lowest class index.
inline Label weighted_vote(std::span<const Label> votes, const VoteWeights& weights) {
    if (votes.empty()) throw ArgumentError("weighted_vote of an empty vote list");
    if (votes.size() != weights.size()) {
        throw ArgumentError("weighted_vote got " + std::to_string(votes.size()) + " votes but " +
                            std::to_string(weights.size()) + " weights");
    }
    const std::size_t n = static_cast<std::size_t>(*std::max_element(votes.begin(), votes.end())) + 1;
    std::vector<double> scores(n, 0.0);
    for (std::size_t j = 0; j < votes.size(); ++j) scores[votes[j]] += weights[j];
    return argmax_lowest(scores);
}

enum class VoteMethod { Vote, WeightedVote };

inline std::string_view to_string(VoteMethod m) { return m == VoteMethod::Vote ? "vote" : "weighted_vote"; }

inline std::optional<VoteMethod> parse_vote_method(std::string_view s) {
    if (s == "vote") return VoteMethod::Vote;
    if (s == "weighted_vote") return VoteMethod::WeightedVote;
    return std::nullopt;
}

} // namespace fedvote
