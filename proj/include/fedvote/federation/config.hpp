#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <type_traits>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedvote/ensemble/vote.hpp"
#include "fedvote/federation/federation.hpp"
#include "fedvote/models/architecture.hpp"
#include "fedvote/models/train.hpp"

namespace fedvote {

/// Raised with every problem found in a run configuration.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p) {
        std::string s = "invalid configuration:";
        for (const auto& x : p) s += "\n  - " + x;
        return s;
    }
    std::vector<std::string> problems_;
};

struct SyntheticSpec {
    std::size_t per_class = 500;
    std::size_t dim = 16;
    double separation = 6.0;
};

/// Everything a federated run needs. Defaults are the desk-scale reference run.
struct ExperimentConfig {
    std::optional<std::string> dataset_path; // when unset, synthetic data is generated
    SyntheticSpec synthetic;
    std::size_t clients = 4;
    std::size_t rounds = 1;
    GlobalStrategy strategy = GlobalStrategy::FedAvgEnsemble;
    TrainConfig train;
    VoteMethod vote_method = VoteMethod::Vote;
    VoteWeighting vote_weighting = VoteWeighting::Validation;
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    std::size_t mlp_hidden = 32;
    std::vector<ArchKind> architectures{ArchKind::Linear, ArchKind::Mlp, ArchKind::Cnn};
    bool parallel_clients = false;
    std::uint64_t seed = 42;
    std::string output_dir = "fedvote_run";

    std::vector<std::string> problems() const {
        std::vector<std::string> p;
        if (!dataset_path) {
            if (synthetic.per_class < 1) p.push_back("dataset.synthetic.per_class must be >= 1");
            if (synthetic.dim < 1) p.push_back("dataset.synthetic.dim must be >= 1");
            if (!(synthetic.separation > 0.0)) p.push_back("dataset.synthetic.separation must be > 0");
        }
        if (clients < 1) p.push_back("clients must be >= 1");
        if (rounds < 1) p.push_back("rounds must be >= 1");
        if (!(train.learning_rate >= 0.0)) p.push_back("train.learning_rate must be >= 0");
        if (train.epochs < 1) p.push_back("train.epochs must be >= 1");
        if (train.batch_size < 1) p.push_back("train.batch_size must be >= 1");
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) p.push_back("train_fraction must lie in (0, 1)");
        if (!(val_fraction > 0.0 && val_fraction < 1.0)) p.push_back("val_fraction must lie in (0, 1)");
        if (mlp_hidden < 1) p.push_back("mlp_hidden must be >= 1");
        if (architectures.empty()) p.push_back("architectures must name at least one kind");
        std::set<ArchKind> seen(architectures.begin(), architectures.end());
        if (seen.size() != architectures.size()) p.push_back("architectures must not repeat a kind");
        if (output_dir.empty()) p.push_back("output_dir must not be empty");
        return p;
    }

    void validate() const {
        if (auto p = problems(); !p.empty()) throw ConfigError(std::move(p));
    }
};

namespace detail {

// Collects type errors instead of throwing on the first one.
struct ConfigReader {
    std::vector<std::string>& problems;

    void reject_unknown(const nlohmann::json& obj, const std::string& where, const std::set<std::string>& known) {
        for (const auto& [key, _] : obj.items()) {
            if (!known.count(key)) problems.push_back("unknown key '" + where + key + "'");
        }
    }

    template <typename T>
    void read(const nlohmann::json& obj, const std::string& key, const std::string& where, T& out) {
        if (!obj.contains(key)) return;
        const auto& v = obj.at(key);
        bool ok = false;
        if constexpr (std::is_same_v<T, bool>) ok = v.is_boolean();
        else if constexpr (std::is_unsigned_v<T>) ok = v.is_number_unsigned();
        else if constexpr (std::is_floating_point_v<T>) ok = v.is_number();
        else if constexpr (std::is_same_v<T, std::string>) ok = v.is_string();
        if (!ok) {
            problems.push_back("'" + where + key + "' has the wrong type");
            return;
        }
        out = v.get<T>();
    }
};

} // namespace detail

/// Parses a run configuration; unknown keys and type errors are all reported
/// together in one ConfigError, followed by the semantic checks.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    std::vector<std::string> problems;
    detail::ConfigReader r{problems};
    ExperimentConfig cfg;
    if (!j.is_object()) throw ConfigError({"configuration must be a JSON object"});

    r.reject_unknown(j, "", {"dataset", "clients", "rounds", "strategy", "train", "vote_method", "vote_weighting",
                             "train_fraction", "val_fraction", "mlp_hidden", "architectures", "parallel_clients",
                             "seed", "output_dir"});
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        if (!d.is_object()) {
            problems.push_back("'dataset' must be an object");
        } else {
            r.reject_unknown(d, "dataset.", {"path", "synthetic"});
            if (d.contains("path") && d.contains("synthetic")) {
                problems.push_back("'dataset' takes either 'path' or 'synthetic', not both");
            }
            if (d.contains("path")) {
                std::string path;
                r.read(d, "path", "dataset.", path);
                cfg.dataset_path = path;
            }
            if (d.contains("synthetic")) {
                const auto& s = d.at("synthetic");
                if (!s.is_object()) {
                    problems.push_back("'dataset.synthetic' must be an object");
                } else {
                    r.reject_unknown(s, "dataset.synthetic.", {"per_class", "dim", "separation"});
                    r.read(s, "per_class", "dataset.synthetic.", cfg.synthetic.per_class);
                    r.read(s, "dim", "dataset.synthetic.", cfg.synthetic.dim);
                    r.read(s, "separation", "dataset.synthetic.", cfg.synthetic.separation);
                }
            }
        }
    }
    r.read(j, "clients", "", cfg.clients);
    r.read(j, "rounds", "", cfg.rounds);
    if (j.contains("strategy")) {
        std::string s;
        r.read(j, "strategy", "", s);
        if (auto v = parse_global_strategy(s)) cfg.strategy = *v;
        else problems.push_back("'strategy' must be fedavg_ensemble or mode_of_client_ensembles");
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        if (!t.is_object()) {
            problems.push_back("'train' must be an object");
        } else {
            r.reject_unknown(t, "train.", {"learning_rate", "epochs", "batch_size"});
            r.read(t, "learning_rate", "train.", cfg.train.learning_rate);
            r.read(t, "epochs", "train.", cfg.train.epochs);
            r.read(t, "batch_size", "train.", cfg.train.batch_size);
        }
    }
    if (j.contains("vote_method")) {
        std::string s;
        r.read(j, "vote_method", "", s);
        if (auto v = parse_vote_method(s)) cfg.vote_method = *v;
        else problems.push_back("'vote_method' must be vote or weighted_vote");
    }
    if (j.contains("vote_weighting")) {
        std::string s;
        r.read(j, "vote_weighting", "", s);
        if (auto v = parse_vote_weighting(s)) cfg.vote_weighting = *v;
        else problems.push_back("'vote_weighting' must be validation or uniform");
    }
    r.read(j, "train_fraction", "", cfg.train_fraction);
    r.read(j, "val_fraction", "", cfg.val_fraction);
    r.read(j, "mlp_hidden", "", cfg.mlp_hidden);
    if (j.contains("architectures")) {
        const auto& a = j.at("architectures");
        if (!a.is_array()) {
            problems.push_back("'architectures' must be an array");
        } else {
            cfg.architectures.clear();
            for (const auto& e : a) {
                const auto k = e.is_string() ? parse_arch_kind(e.get<std::string>()) : std::nullopt;
                if (k) cfg.architectures.push_back(*k);
                else problems.push_back("'architectures' entries must be LINEAR, MLP or CNN");
            }
        }
    }
    r.read(j, "parallel_clients", "", cfg.parallel_clients);
    r.read(j, "seed", "", cfg.seed);
    r.read(j, "output_dir", "", cfg.output_dir);

    for (auto& p : cfg.problems()) problems.push_back(std::move(p));
    if (!problems.empty()) throw ConfigError(std::move(problems));
    return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json dataset;
    if (cfg.dataset_path) dataset["path"] = *cfg.dataset_path;
    else
        dataset["synthetic"] = {{"per_class", cfg.synthetic.per_class},
                                {"dim", cfg.synthetic.dim},
                                {"separation", cfg.synthetic.separation}};
    nlohmann::json kinds = nlohmann::json::array();
    for (auto k : cfg.architectures) kinds.push_back(std::string(to_string(k)));
    return {{"dataset", dataset},
            {"clients", cfg.clients},
            {"rounds", cfg.rounds},
            {"strategy", std::string(to_string(cfg.strategy))},
            {"train",
             {{"learning_rate", cfg.train.learning_rate},
              {"epochs", cfg.train.epochs},
              {"batch_size", cfg.train.batch_size}}},
            {"vote_method", std::string(to_string(cfg.vote_method))},
            {"vote_weighting", std::string(to_string(cfg.vote_weighting))},
            {"train_fraction", cfg.train_fraction},
            {"val_fraction", cfg.val_fraction},
            {"mlp_hidden", cfg.mlp_hidden},
            {"architectures", kinds},
            {"parallel_clients", cfg.parallel_clients},
            {"seed", cfg.seed},
            {"output_dir", cfg.output_dir}};
}

} // namespace fedvote
