#pragma once

// Subcommand implementations for the fedvote executable. Kept in a header so
// tests can drive the whole CLI in-process through run_cli().

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fedvote/fedvote.hpp"

namespace fedvote::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

/// Bad flags, bad paths, incompatible inputs: anything the caller can fix.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// --seed, else the config file's seed, else FEDVOTE_SEED, else 42.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::optional<std::uint64_t> from_config = {}) {
    if (flag) return *flag;
    if (from_config) return *from_config;
    if (const char* env = std::getenv("FEDVOTE_SEED"); env && *env) {
        std::size_t used = 0;
        std::uint64_t v = 0;
        try {
            v = std::stoull(env, &used, 10);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || env[used] != '\0' || env[0] == '-') {
            throw UsageError(std::string("FEDVOTE_SEED is not an unsigned integer: '") + env + "'");
        }
        return v;
    }
    return 42;
}

inline void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
    f << text;
}

inline Dataset load_input_dataset(const fs::path& dir) {
    if (!fs::exists(dir / "manifest.json")) throw UsageError("no dataset at '" + dir.string() + "' (manifest.json missing)");
    return load_dataset(dir);
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
    std::size_t per_class = 500;
    std::size_t dim = 16;
    double separation = 6.0;
    std::optional<std::uint64_t> seed;
    std::string out;
};

inline int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    if (a.per_class < 1) throw UsageError("--per-class must be >= 1");
    if (a.dim < 1) throw UsageError("--dim must be >= 1");
    if (!(a.separation > 0.0)) throw UsageError("--separation must be > 0");
    // Same stream as a synthetic run, so `generate --seed S` reproduces the data of `run --seed S`.
    RngStream rng(resolve_seed(a.seed), stream_id("data/blobs"));
    const Dataset d = generate_blobs(rng, a.per_class, a.dim, a.separation);
    save_dataset(d, a.out);
    out << "wrote " << d.size() << " samples (" << shape_str(d.feature_shape()) << ", " << d.num_classes()
        << " classes) to " << a.out << "\n";
    return kOk;
}

// ---- partition ------------------------------------------------------------

struct PartitionArgs {
    std::string data;
    std::size_t clients = 4;
    std::optional<std::uint64_t> seed;
    std::string out;
};

inline int cmd_partition(const PartitionArgs& a, std::ostream& out) {
    if (a.clients < 1) throw UsageError("--clients must be >= 1");
    const Dataset d = load_input_dataset(a.data);
    RngStream rng(resolve_seed(a.seed), stream_id("data/distribute"));
    Partition p;
    try {
        p = partition_clients(d, a.clients, rng);
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }
    for (std::size_t i = 0; i < p.client_shards.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "client_%03zu", i);
        save_dataset(p.client_shards[i], fs::path(a.out) / name);
        out << name << ": " << p.client_shards[i].size() << " samples\n";
    }
    return kOk;
}

// ---- run ------------------------------------------------------------------

struct RunArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> clients;
    std::optional<std::size_t> rounds;
    std::optional<std::string> strategy;
    std::optional<std::string> vote_method;
    std::optional<std::string> data;
    std::optional<std::string> out;
    bool parallel_clients = false;
};

inline ExperimentConfig resolve_run_config(const RunArgs& a) {
    nlohmann::json j = nlohmann::json::object();
    if (!a.config.empty()) {
        if (!fs::exists(a.config)) throw UsageError("config file '" + a.config + "' does not exist");
        std::ifstream f(a.config);
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError({std::string("config file is not valid JSON: ") + e.what()});
        }
    }
    ExperimentConfig cfg = config_from_json(j);
    std::optional<std::uint64_t> config_seed;
    if (j.contains("seed")) config_seed = cfg.seed;
    cfg.seed = resolve_seed(a.seed, config_seed);

    std::vector<std::string> problems;
    if (a.clients) cfg.clients = *a.clients;
    if (a.rounds) cfg.rounds = *a.rounds;
    if (a.strategy) {
        if (auto s = parse_global_strategy(*a.strategy)) cfg.strategy = *s;
        else problems.push_back("--strategy must be fedavg_ensemble or mode_of_client_ensembles");
    }
    if (a.vote_method) {
        if (auto m = parse_vote_method(*a.vote_method)) cfg.vote_method = *m;
        else problems.push_back("--vote-method must be vote or weighted_vote");
    }
    if (a.data) cfg.dataset_path = *a.data;
    if (a.out) cfg.output_dir = *a.out;
    if (a.parallel_clients) cfg.parallel_clients = true;
    for (auto& p : cfg.problems()) problems.push_back(std::move(p));
    if (!problems.empty()) throw ConfigError(std::move(problems));
    if (cfg.dataset_path && !fs::exists(fs::path(*cfg.dataset_path) / "manifest.json")) {
        throw UsageError("no dataset at '" + *cfg.dataset_path + "' (manifest.json missing)");
    }
    return cfg;
}

/// Rows: global model, client 0's members, client 0's ensemble. Training
/// columns use the data each model was fitted on; validation columns use the
/// held-out evaluation split.
inline std::vector<TableRow> summary_rows(const FederationRun& run) {
    const GlobalModel& g = run.global_history.back();
    std::vector<TableRow> rows;
    rows.push_back({"Global Model (FL)", evaluate_global(g, run.clients, run.train_pool),
                    evaluate_global(g, run.clients, run.eval_set)});
    const ClientState& c0 = run.clients.front();
    for (const auto& m : c0.ensemble.members()) {
        rows.push_back({std::string(to_string(m.kind())), evaluate(m, c0.train_set), evaluate(m, run.eval_set)});
    }
    rows.push_back({"Ensemble Model", evaluate(c0.ensemble, c0.method, c0.train_set),
                    evaluate(c0.ensemble, c0.method, run.eval_set)});
    return rows;
}

inline int cmd_run(const RunArgs& a, std::ostream& out) {
    const ExperimentConfig cfg = resolve_run_config(a);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    write_text(dir / "config.json", config_to_json(cfg).dump(2) + "\n");

    std::ofstream rounds(dir / "rounds.jsonl", std::ios::binary | std::ios::trunc);
    std::ofstream timings(dir / "timings.jsonl", std::ios::binary | std::ios::trunc);
    if (!rounds || !timings) throw std::runtime_error("cannot write logs in '" + dir.string() + "'");

    const auto run = run_federation(cfg, [&](const RoundRecord& rec, const Federation& fed) {
        rounds << to_json(rec).dump() << "\n" << std::flush;
        timings << nlohmann::json{{"round", rec.round}, {"wall_seconds", rec.wall_seconds}}.dump() << "\n"
                << std::flush;
        char name[32];
        std::snprintf(name, sizeof name, "round_%03zu", rec.round);
        save_ensemble(fed.global().ensemble, fed.global().method, dir / name / "global");
        out << "round " << rec.round << ": global validation accuracy " << std::fixed << std::setprecision(4)
            << rec.global_val.accuracy << " (" << std::setprecision(2) << rec.wall_seconds << " s)\n"
            << std::defaultfloat;
    });

    for (const auto& c : run.clients) {
        save_ensemble(c.ensemble, c.method, dir / "final" / ("client_" + std::to_string(c.client_id)));
    }
    save_ensemble(run.global_history.back().ensemble, run.global_history.back().method, dir / "final" / "global");
    save_dataset(run.train_pool, dir / "train_pool");
    save_dataset(run.eval_set, dir / "eval_set");

    const std::string table = render_table(summary_rows(run));
    write_text(dir / "table.txt", table);
    out << table;
    return kOk;
}

// ---- evaluate / predict ---------------------------------------------------

/// A single model or an ensemble loaded from a checkpoint directory.
struct LoadedPredictor {
    std::optional<BaseLearner> model;
    std::optional<LoadedEnsemble> ensemble;

    const Architecture& architecture() const {
        return model ? model->architecture() : ensemble->model.member(0).architecture();
    }
    std::vector<Label> predict_batch(const Tensor& x) const {
        return model ? predict(*model, x) : ensemble_predict(ensemble->model, x, ensemble->method);
    }
    MetricsReport evaluate_on(const Dataset& d) const {
        return model ? evaluate(*model, d) : evaluate(ensemble->model, ensemble->method, d);
    }
};

inline LoadedPredictor load_predictor(const fs::path& dir, const std::optional<std::string>& method) {
    LoadedPredictor p;
    try {
        if (fs::exists(dir / "ensemble.json")) p.ensemble = load_ensemble(dir);
        else if (fs::exists(dir / "model.json")) p.model = load_model(dir);
        else throw UsageError("no checkpoint at '" + dir.string() + "' (expected ensemble.json or model.json)");
    } catch (const FormatError& e) {
        throw UsageError(std::string("cannot load checkpoint: ") + e.what());
    }
    if (method) {
        const auto m = parse_vote_method(*method);
        if (!m) throw UsageError("--method must be vote or weighted_vote");
        if (!p.ensemble) throw UsageError("--method applies to ensemble checkpoints only");
        p.ensemble->method = *m;
    }
    return p;
}

inline void check_compatible(const LoadedPredictor& p, const Dataset& d) {
    const Architecture& arch = p.architecture();
    if (arch.input_shape != d.feature_shape()) {
        throw UsageError("shape mismatch: checkpoint expects samples of shape " + shape_str(arch.input_shape) +
                         " but the dataset has " + shape_str(d.feature_shape()));
    }
    if (arch.num_classes != d.num_classes()) {
        throw UsageError("class count mismatch: checkpoint has " + std::to_string(arch.num_classes) +
                         " classes but the dataset has " + std::to_string(d.num_classes()));
    }
}

struct EvaluateArgs {
    std::string checkpoint;
    std::string data;
    std::string out = ".";
    std::optional<std::string> method;
};

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const LoadedPredictor p = load_predictor(a.checkpoint, a.method);
    const Dataset d = load_input_dataset(a.data);
    check_compatible(p, d);
    const MetricsReport r = p.evaluate_on(d);
    const auto pred = d.empty() ? std::vector<Label>{} : p.predict_batch(d.features());
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "report.json", to_json(r).dump(2) + "\n");
    write_text(fs::path(a.out) / "confusion.csv", confusion_csv(confusion(d.labels(), pred, d.label_space())));
    out << std::fixed << std::setprecision(4) << "accuracy " << r.accuracy << "  precision " << r.precision
        << "  recall " << r.recall << "  f1 " << r.f1 << "  loss " << r.mean_loss << "  (" << r.num_samples
        << " samples)\n"
        << std::defaultfloat;
    return kOk;
}

struct PredictArgs {
    std::string checkpoint;
    std::string data;
    std::string out = "predictions.csv";
    std::optional<std::string> method;
};

inline int cmd_predict(const PredictArgs& a, std::ostream& out) {
    const LoadedPredictor p = load_predictor(a.checkpoint, a.method);
    const Dataset d = load_input_dataset(a.data);
    check_compatible(p, d);
    const auto pred = d.empty() ? std::vector<Label>{} : p.predict_batch(d.features());
    std::string csv = "index,predicted,class\n";
    for (std::size_t i = 0; i < pred.size(); ++i) {
        csv += std::to_string(i) + "," + std::to_string(pred[i]) + "," + d.label_space().name(pred[i]) + "\n";
    }
    write_text(a.out, csv);
    out << "wrote " << pred.size() << " predictions to " << a.out << "\n";
    return kOk;
}

// ---- entry point ----------------------------------------------------------

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"fedvote: ensemble-based federated learning simulator"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic 4-class blob dataset");
    g->add_option("--per-class", gen.per_class, "Samples per class")->capture_default_str();
    g->add_option("--dim", gen.dim, "Feature dimension")->capture_default_str();
    g->add_option("--separation", gen.separation, "Distance between class centers")->capture_default_str();
    g->add_option("--seed", gen.seed, "Root seed (default: FEDVOTE_SEED or 42)");
    g->add_option("--out", gen.out, "Output dataset directory")->required();

    PartitionArgs part;
    auto* p = app.add_subcommand("partition", "Split a dataset into stratified client shards");
    p->add_option("--data", part.data, "Input dataset directory")->required();
    p->add_option("--clients", part.clients, "Number of clients")->capture_default_str();
    p->add_option("--seed", part.seed, "Root seed (default: FEDVOTE_SEED or 42)");
    p->add_option("--out", part.out, "Output directory (one client_NNN dataset per shard)")->required();

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run a federated ensemble experiment");
    r->add_option("--config", run.config, "JSON run configuration");
    r->add_option("--seed", run.seed, "Root seed, overrides the config");
    r->add_option("--clients", run.clients, "Number of clients");
    r->add_option("--rounds", run.rounds, "Communication rounds");
    r->add_option("--strategy", run.strategy, "fedavg_ensemble | mode_of_client_ensembles");
    r->add_option("--vote-method", run.vote_method, "vote | weighted_vote");
    r->add_option("--data", run.data, "Dataset directory (default: synthetic blobs)");
    r->add_option("--out", run.out, "Output directory");
    r->add_flag("--parallel-clients", run.parallel_clients, "Train clients concurrently");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Score a model or ensemble checkpoint on a dataset");
    e->add_option("--checkpoint", ev.checkpoint, "Checkpoint directory")->required();
    e->add_option("--data", ev.data, "Dataset directory")->required();
    e->add_option("--out", ev.out, "Directory for report.json and confusion.csv")->capture_default_str();
    e->add_option("--method", ev.method, "Override the ensemble vote method");

    PredictArgs pr;
    auto* q = app.add_subcommand("predict", "Write per-sample predictions as CSV");
    q->add_option("--checkpoint", pr.checkpoint, "Checkpoint directory")->required();
    q->add_option("--data", pr.data, "Dataset directory (labels are ignored)")->required();
    q->add_option("--out", pr.out, "Output CSV path")->capture_default_str();
    q->add_option("--method", pr.method, "Override the ensemble vote method");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (*g) return cmd_generate(gen, out);
        if (*p) return cmd_partition(part, out);
        if (*r) return cmd_run(run, out);
        if (*e) return cmd_evaluate(ev, out);
        if (*q) return cmd_predict(pr, out);
    } catch (const UsageError& ex) {
        err << "error: " << ex.what() << "\n";
        return kUsageError;
    } catch (const ConfigError& ex) {
        err << "error: " << ex.what() << "\n";
        return kUsageError;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kRuntimeFailure;
    }
    return kUsageError;
}

} // namespace fedvote::cli
