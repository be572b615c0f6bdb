#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fedvote/data/dataset.hpp"
#include "fedvote/data/split.hpp"
#include "fedvote/ensemble/ensemble.hpp"
#include "fedvote/error.hpp"
#include "fedvote/evaluate.hpp"
#include "fedvote/metrics/metrics.hpp"
#include "fedvote/models/train.hpp"
#include "fedvote/numerics/rng.hpp"

namespace fedvote {

enum class GlobalStrategy { FedAvgEnsemble, ModeOfClientEnsembles };

inline std::string_view to_string(GlobalStrategy s) {
    return s == GlobalStrategy::FedAvgEnsemble ? "fedavg_ensemble" : "mode_of_client_ensembles";
}

inline std::optional<GlobalStrategy> parse_global_strategy(std::string_view s) {
    if (s == "fedavg_ensemble") return GlobalStrategy::FedAvgEnsemble;
    if (s == "mode_of_client_ensembles") return GlobalStrategy::ModeOfClientEnsembles;
    return std::nullopt;
}

enum class VoteWeighting { Validation, Uniform };

inline std::string_view to_string(VoteWeighting w) { return w == VoteWeighting::Validation ? "validation" : "uniform"; }

inline std::optional<VoteWeighting> parse_vote_weighting(std::string_view s) {
    if (s == "validation") return VoteWeighting::Validation;
    if (s == "uniform") return VoteWeighting::Uniform;
    return std::nullopt;
}

/// Failure inside one client's round; carries the client id.
class ClientError : public std::runtime_error {
public:
    ClientError(std::size_t client_id, const std::string& what)
        : std::runtime_error("client " + std::to_string(client_id) + ": " + what), client_id_(client_id) {}
    std::size_t client_id() const noexcept { return client_id_; }

private:
    std::size_t client_id_;
};

struct ClientState {
    std::size_t client_id = 0;
    Dataset train_set;
    Dataset val_set;
    EnsembleModel ensemble;
    VoteMethod method = VoteMethod::Vote;
};

/// What a client sends to the server after a round.
struct ClientUpdate {
    std::size_t client_id = 0;
    std::vector<Architecture> architectures; // one per member, ensemble order
    std::vector<ParameterVector> params;     // aligned with architectures
    std::size_t sample_count = 0;            // training samples used (FedAvg weight)
    MetricsReport val_metrics;               // local ensemble on the client's validation set
    std::vector<MetricsReport> member_val_metrics;
};

struct GlobalModel {
    EnsembleModel ensemble; // per-kind averaged members, uniform vote weights
    GlobalStrategy strategy = GlobalStrategy::FedAvgEnsemble;
    VoteMethod method = VoteMethod::Vote;
};

/// Stratified round-robin partition into `num_clients` shards, then a
/// per-client stratified train/validation split (floor((1 - val_fraction) * n)
/// per class to train). Every client starts from `initial`.
inline std::vector<ClientState> distribute(const Dataset& data, std::size_t num_clients, RngStream& rng,
                                           const EnsembleModel& initial, double val_fraction = 0.1,
                                           VoteMethod method = VoteMethod::Vote) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ArgumentError("val_fraction must lie in (0, 1)");
    const auto counts = data.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < num_clients) {
            throw ArgumentError("class '" + data.label_space().name(c) + "' has " + std::to_string(counts[c]) +
                                " samples, fewer than the " + std::to_string(num_clients) + " clients");
        }
    }
    const Partition partition = partition_clients(data, num_clients, rng);
    std::vector<ClientState> clients;
    clients.reserve(num_clients);
    for (std::size_t i = 0; i < num_clients; ++i) {
        auto [train, val] = stratified_split(partition.client_shards[i], 1.0 - val_fraction, rng);
        clients.push_back(ClientState{i, std::move(train), std::move(val), initial, method});
    }
    return clients;
}

/// Per-member training seed for (client, round, member).
inline std::uint64_t member_seed(std::uint64_t root, std::size_t client, std::size_t round, std::size_t member) {
    return rng_detail::mix64(root ^ stream_id("client/train", {client, round, member}));
}

struct RoundOptions {
    TrainConfig train;
    std::size_t round = 1;
    VoteWeighting weighting = VoteWeighting::Validation;
};

/// Trains every ensemble member on the client's training set, refreshes the
/// vote weights, evaluates on the client's validation set and packages the
/// flat parameters. The trained ensemble is stored back into `client`.
inline ClientUpdate client_round(ClientState& client, const RoundOptions& opt) {
    try {
        if (client.train_set.empty()) throw ArgumentError("empty training set");
        if (client.val_set.empty()) throw ArgumentError("empty validation set");
        std::vector<BaseLearner> trained;
        trained.reserve(client.ensemble.size());
        for (std::size_t j = 0; j < client.ensemble.size(); ++j) {
            TrainConfig cfg = opt.train;
            cfg.seed = member_seed(opt.train.seed, client.client_id, opt.round, j);
            trained.push_back(train_local(client.ensemble.member(j), client.train_set, cfg));
        }
        VoteWeights weights = opt.weighting == VoteWeighting::Validation
                                  ? weights_from_validation(trained, client.val_set)
                                  : VoteWeights::uniform(trained.size());
        client.ensemble = EnsembleModel(std::move(trained), std::move(weights));

        ClientUpdate u;
        u.client_id = client.client_id;
        u.sample_count = client.train_set.size();
        for (const auto& m : client.ensemble.members()) {
            u.architectures.push_back(m.architecture());
            u.params.push_back(m.params());
            u.member_val_metrics.push_back(evaluate(m, client.val_set));
        }
        u.val_metrics = evaluate(client.ensemble, client.method, client.val_set);
        return u;
    } catch (const ClientError&) {
        throw;
    } catch (const std::exception& e) {
        throw ClientError(client.client_id, e.what());
    }
}

/// Sample-count-weighted mean of client parameters, separately for each member
/// position (= architecture kind). Updates are reduced in ascending client_id
/// order with the running form mean += (w_i / W_i) * (theta_i - mean), which is
/// algebraically sum(w theta) / sum(w) and returns theta exactly when all
/// clients agree.
inline GlobalModel aggregate_fedavg(const std::vector<ClientUpdate>& updates,
                                    GlobalStrategy strategy = GlobalStrategy::FedAvgEnsemble,
                                    VoteMethod method = VoteMethod::Vote) {
    if (updates.empty()) throw ArgumentError("aggregate_fedavg needs at least one update");
    std::vector<const ClientUpdate*> order;
    for (const auto& u : updates) order.push_back(&u);
    std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->client_id < b->client_id; });

    const ClientUpdate& ref = *order.front();
    if (ref.params.empty() || ref.params.size() != ref.architectures.size()) {
        throw CompatibilityError("client " + std::to_string(ref.client_id) + " sent a malformed update");
    }
    std::set<ArchKind> kinds;
    for (const auto& a : ref.architectures) {
        if (!kinds.insert(a.kind).second) {
            throw CompatibilityError("client " + std::to_string(ref.client_id) + " sent two members of kind " +
                                     std::string(to_string(a.kind)));
        }
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        const ClientUpdate& u = *order[i];
        const std::string who = "client " + std::to_string(u.client_id);
        if (i > 0 && u.client_id == order[i - 1]->client_id) throw CompatibilityError("duplicate update from " + who);
        if (u.sample_count == 0) throw CompatibilityError(who + " reports zero training samples");
        if (u.architectures != ref.architectures || u.params.size() != ref.params.size()) {
            throw CompatibilityError(who + " does not match the architectures of client " +
                                     std::to_string(ref.client_id));
        }
        for (std::size_t j = 0; j < u.params.size(); ++j) {
            if (u.params[j].kind != ref.params[j].kind || u.params[j].size() != ref.params[j].size()) {
                throw CompatibilityError(who + " member " + std::to_string(j) + " has kind/length " +
                                         std::string(to_string(u.params[j].kind)) + "/" +
                                         std::to_string(u.params[j].size()) + ", expected " +
                                         std::string(to_string(ref.params[j].kind)) + "/" +
                                         std::to_string(ref.params[j].size()));
            }
        }
    }

    std::vector<BaseLearner> members;
    for (std::size_t j = 0; j < ref.params.size(); ++j) {
        std::vector<double> mean = ref.params[j].values.data();
        double total = static_cast<double>(ref.sample_count);
        for (std::size_t i = 1; i < order.size(); ++i) {
            const double w = static_cast<double>(order[i]->sample_count);
            total += w;
            const double share = w / total;
            const auto theta = order[i]->params[j].values.values();
            for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += share * (theta[t] - mean[t]);
        }
        const Shape shape{mean.size()};
        members.emplace_back(ref.architectures[j], ParameterVector{ref.params[j].kind, Tensor(shape, std::move(mean))});
    }
    return GlobalModel{EnsembleModel(std::move(members)), strategy, method};
}

/// fedavg_ensemble: vote of the averaged global ensemble.
/// mode_of_client_ensembles: per-sample mode of the client ensembles' predictions.
inline std::vector<Label> global_predict(const GlobalModel& g, const std::vector<ClientState>& clients,
                                         const Tensor& batch) {
    if (g.strategy == GlobalStrategy::FedAvgEnsemble) return ensemble_predict(g.ensemble, batch, g.method);
    if (clients.empty()) throw ArgumentError("mode_of_client_ensembles needs at least one client");
    std::vector<std::vector<Label>> votes;
    votes.reserve(clients.size());
    for (const auto& c : clients) votes.push_back(ensemble_predict(c.ensemble, batch, c.method));
    return combine_votes(votes, VoteMethod::Vote, VoteWeights::uniform(votes.size()));
}

/// Metrics of the global predictor. The loss is that of the uniform mixture of
/// every contributing member's probabilities.
inline MetricsReport evaluate_global(const GlobalModel& g, const std::vector<ClientState>& clients, const Dataset& d) {
    if (d.empty()) return report(ConfusionMatrix(d.label_space()), 0.0);
    const auto pred = global_predict(g, clients, d.features());
    Tensor mix = ensemble_mixture_probs(g.ensemble, d.features());
    if (g.strategy == GlobalStrategy::ModeOfClientEnsembles) {
        mix = Tensor::zeros(mix.shape());
        for (const auto& c : clients) {
            const Tensor p = ensemble_mixture_probs(c.ensemble, d.features());
            for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += p[i];
        }
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] /= static_cast<double>(clients.size());
    }
    return report(confusion(d.labels(), pred, d.label_space()), cross_entropy(mix, d.labels()));
}

} // namespace fedvote
