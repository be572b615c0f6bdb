#pragma once

#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fedvote/data/io.hpp"
#include "fedvote/data/split.hpp"
#include "fedvote/data/synthetic.hpp"
#include "fedvote/federation/config.hpp"
#include "fedvote/federation/federation.hpp"

namespace fedvote {

struct ClientRoundReport {
    std::size_t client_id = 0;
    std::size_t sample_count = 0;
    MetricsReport val;
};

struct RoundRecord {
    std::size_t round = 0;
    std::vector<ClientRoundReport> clients;
    MetricsReport global_val;
    double wall_seconds = 0.0; // kept out of rounds.jsonl so the log stays reproducible
};

/// One JSON object per round. Wall time is deliberately not serialized.
inline nlohmann::json to_json(const RoundRecord& r) {
    nlohmann::json clients = nlohmann::json::array();
    for (const auto& c : r.clients) {
        clients.push_back({{"client_id", c.client_id}, {"sample_count", c.sample_count}, {"val", to_json(c.val)}});
    }
    return {{"round", r.round}, {"clients", clients}, {"global", {{"val", to_json(r.global_val)}}}};
}

/// Architectures for the configured member kinds on the given sample shape.
inline std::vector<Architecture> member_architectures(const ExperimentConfig& cfg, const Shape& input,
                                                      std::size_t num_classes) {
    std::vector<Architecture> out;
    for (ArchKind k : cfg.architectures) {
        Architecture a{k, input, num_classes};
        a.hidden = cfg.mlp_hidden;
        a.validate();
        out.push_back(a);
    }
    return out;
}

/// Server plus simulated clients. The server seeds one initial model per
/// architecture from the root seed and broadcasts it, so round 1 starts every
/// client from the same point; later rounds start from the last global model.
class Federation {
public:
    Federation(const Dataset& train_pool, ExperimentConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
        const auto archs = member_architectures(cfg_, train_pool.feature_shape(), train_pool.num_classes());
        std::vector<BaseLearner> initial;
        for (std::size_t j = 0; j < archs.size(); ++j) {
            RngStream rng(cfg_.seed, stream_id("model/init", {static_cast<std::uint64_t>(archs[j].kind)}));
            initial.push_back(init_model(archs[j], rng));
        }
        global_ = GlobalModel{EnsembleModel(std::move(initial)), cfg_.strategy, cfg_.vote_method};
        RngStream rng(cfg_.seed, stream_id("data/distribute"));
        clients_ = distribute(train_pool, cfg_.clients, rng, global_->ensemble, cfg_.val_fraction, cfg_.vote_method);
    }

    const ExperimentConfig& config() const noexcept { return cfg_; }
    const GlobalModel& global() const { return *global_; }
    const std::vector<ClientState>& clients() const noexcept { return clients_; }
    std::size_t rounds_done() const noexcept { return round_; }

    /// Runs one round with the configured training settings.
    RoundRecord step(const Dataset& eval_set) { return step(eval_set, cfg_.train); }

    /// Runs one round with explicit training settings (the seed is taken from the config).
    RoundRecord step(const Dataset& eval_set, TrainConfig train) {
        const auto start = std::chrono::steady_clock::now();
        ++round_;
        train.seed = cfg_.seed;
        const RoundOptions opt{train, round_, cfg_.vote_weighting};

        for (auto& c : clients_) c.ensemble = broadcast(c.ensemble);

        std::vector<std::optional<ClientUpdate>> slots(clients_.size());
        if (cfg_.parallel_clients && clients_.size() > 1) {
            std::vector<std::exception_ptr> errors(clients_.size());
            std::vector<std::thread> workers;
            for (std::size_t i = 0; i < clients_.size(); ++i) {
                workers.emplace_back([&, i] {
                    try {
                        slots[i] = client_round(clients_[i], opt);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        } else {
            for (std::size_t i = 0; i < clients_.size(); ++i) slots[i] = client_round(clients_[i], opt);
        }

        std::vector<ClientUpdate> updates;
        for (auto& s : slots) updates.push_back(std::move(*s));
        global_ = aggregate_fedavg(updates, cfg_.strategy, cfg_.vote_method);

        RoundRecord rec;
        rec.round = round_;
        for (const auto& u : updates) rec.clients.push_back({u.client_id, u.sample_count, u.val_metrics});
        rec.global_val = evaluate_global(*global_, clients_, eval_set);
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return rec;
    }

private:
    // Client members take the global parameters; client vote weights are kept
    // until the next local validation refreshes them.
    EnsembleModel broadcast(const EnsembleModel& local) const {
        std::vector<BaseLearner> members;
        for (std::size_t j = 0; j < local.size(); ++j) {
            members.push_back(set_params(local.member(j), global_->ensemble.member(j).params()));
        }
        return EnsembleModel(std::move(members), local.weights());
    }

    ExperimentConfig cfg_;
    std::optional<GlobalModel> global_;
    std::vector<ClientState> clients_;
    std::size_t round_ = 0;
};

/// Loads or generates the dataset named by the config.
inline Dataset load_experiment_data(const ExperimentConfig& cfg) {
    if (cfg.dataset_path) return load_dataset(*cfg.dataset_path);
    RngStream rng(cfg.seed, stream_id("data/blobs"));
    return generate_blobs(rng, cfg.synthetic.per_class, cfg.synthetic.dim, cfg.synthetic.separation);
}

struct FederationRun {
    std::vector<RoundRecord> rounds;
    std::vector<GlobalModel> global_history; // global model after each round
    std::vector<ClientState> clients;        // client state after the last round
    Dataset train_pool;
    Dataset eval_set;
};

/// Full protocol: data, train/evaluation split, distribution to clients, then
/// `rounds` cycles of local training, aggregation and broadcast.
/// `on_round` (optional) sees every round as it completes.
inline FederationRun run_federation(
    const ExperimentConfig& cfg,
    const std::function<void(const RoundRecord&, const Federation&)>& on_round = {}) {
    cfg.validate();
    const Dataset data = load_experiment_data(cfg);
    RngStream split_rng(cfg.seed, stream_id("data/split"));
    auto [train_pool, eval_set] = stratified_split(data, cfg.train_fraction, split_rng);

    Federation fed(train_pool, cfg);
    FederationRun run;
    for (std::size_t r = 0; r < cfg.rounds; ++r) {
        run.rounds.push_back(fed.step(eval_set));
        run.global_history.push_back(fed.global());
        if (on_round) on_round(run.rounds.back(), fed);
    }
    run.clients = fed.clients();
    run.train_pool = std::move(train_pool);
    run.eval_set = std::move(eval_set);
    return run;
}

} // namespace fedvote
