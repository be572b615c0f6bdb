#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedvote/data/dataset.hpp"
#include "fedvote/ensemble/vote.hpp"
#include "fedvote/error.hpp"
#include "fedvote/io/binary.hpp"
#include "fedvote/models/checkpoint.hpp"
#include "fedvote/models/learner.hpp"

namespace fedvote {

/// Ordered base learners combined per instance by (weighted) majority vote.
class EnsembleModel {
public:
    EnsembleModel(std::vector<BaseLearner> members, VoteWeights weights)
        : members_(std::move(members)), weights_(std::move(weights)) {
        if (members_.empty()) throw ArgumentError("ensemble needs at least one member");
        if (weights_.size() != members_.size()) {
            throw ArgumentError("ensemble has " + std::to_string(members_.size()) + " members but " +
                                std::to_string(weights_.size()) + " weights");
        }
        for (const auto& m : members_) {
            if (m.num_classes() != members_.front().num_classes()) {
                throw CompatibilityError("ensemble members disagree on the class count");
            }
        }
    }

    explicit EnsembleModel(std::vector<BaseLearner> members)
        : EnsembleModel(members, VoteWeights::uniform(members.size())) {}

    std::size_t size() const noexcept { return members_.size(); }
    std::size_t num_classes() const noexcept { return members_.front().num_classes(); }
    const std::vector<BaseLearner>& members() const noexcept { return members_; }
    const BaseLearner& member(std::size_t i) const { return members_.at(i); }
    const VoteWeights& weights() const noexcept { return weights_; }

private:
    std::vector<BaseLearner> members_;
    VoteWeights weights_;
};

/// votes[j][i]: member j's argmax class for sample i.
inline std::vector<std::vector<Label>> member_votes(const EnsembleModel& e, const Tensor& batch) {
    std::vector<std::vector<Label>> votes;
    votes.reserve(e.size());
    for (const auto& m : e.members()) votes.push_back(predict(m, batch));
    return votes;
}

/// Combines per-member votes column by column.
inline std::vector<Label> combine_votes(const std::vector<std::vector<Label>>& votes, VoteMethod method,
                                        const VoteWeights& weights) {
    if (votes.empty()) return {};
    const std::size_t m = votes.front().size();
    std::vector<Label> out(m);
    std::vector<Label> column(votes.size());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < votes.size(); ++j) column[j] = votes[j][i];
        out[i] = method == VoteMethod::Vote ? majority_vote(column) : weighted_vote(column, weights);
    }
    return out;
}

inline std::vector<Label> ensemble_predict(const EnsembleModel& e, const Tensor& batch, VoteMethod method) {
    return combine_votes(member_votes(e, batch), method, e.weights());
}

/// Uniform mixture of the members' class probabilities. Used only for
/// reporting a loss; predictions always come from hard votes.
inline Tensor ensemble_mixture_probs(const EnsembleModel& e, const Tensor& batch) {
    Tensor sum = forward(e.member(0), batch);
    for (std::size_t j = 1; j < e.size(); ++j) {
        const Tensor p = forward(e.member(j), batch);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += p[i];
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] /= static_cast<double>(e.size());
    return sum;
}

inline constexpr double kMinVoteWeight = 1e-6;

/// w_j = validation accuracy of member j, floored at 1e-6.
inline VoteWeights weights_from_validation(const std::vector<BaseLearner>& members, const Dataset& val) {
    if (val.empty()) throw ArgumentError("weights_from_validation needs a non-empty validation set");
    std::vector<double> w;
    w.reserve(members.size());
    for (const auto& m : members) {
        const auto pred = predict(m, val.features());
        std::size_t hit = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == val.labels()[i];
        w.push_back(std::max(static_cast<double>(hit) / static_cast<double>(val.size()), kMinVoteWeight));
    }
    return VoteWeights(std::move(w));
}

// Ensemble checkpoint directory:
//   ensemble.json  {format_version: 1, members: [subdir...], weights: [...], method}
//   <subdir>/      one model checkpoint per member

inline void save_ensemble(const EnsembleModel& e, VoteMethod method, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t j = 0; j < e.size(); ++j) {
        const std::string sub = "member_" + std::to_string(j) + "_" + std::string(to_string(e.member(j).kind()));
        save_model(e.member(j), dir / sub);
        members.push_back(sub);
    }
    io::write_json(dir / "ensemble.json", {{"format_version", 1},
                                           {"members", members},
                                           {"weights", e.weights().values()},
                                           {"method", std::string(to_string(method))}});
}

struct LoadedEnsemble {
    EnsembleModel model;
    VoteMethod method;
};

inline LoadedEnsemble load_ensemble(const std::filesystem::path& dir) {
    const auto path = dir / "ensemble.json";
    if (!std::filesystem::exists(path)) throw FormatError("no ensemble.json in '" + dir.string() + "'");
    const auto j = io::read_json(path);
    const std::string where = "ensemble.json";
    if (io::require_field<int>(j, "format_version", where) != 1) throw FormatError(where + ": unsupported 'format_version'");
    const auto subdirs = io::require_field<std::vector<std::string>>(j, "members", where);
    const auto weights = io::require_field<std::vector<double>>(j, "weights", where);
    const auto method_name = io::require_field<std::string>(j, "method", where);
    const auto method = parse_vote_method(method_name);
    if (!method) throw FormatError(where + ": field 'method' has unknown value '" + method_name + "'");
    std::vector<BaseLearner> members;
    for (const auto& s : subdirs) members.push_back(load_model(dir / s));
    try {
        return {EnsembleModel(std::move(members), VoteWeights(weights)), *method};
    } catch (const ArgumentError& e) {
        throw FormatError(where + ": " + e.what());
    }
}

} // namespace fedvote
