// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fedvote/fedvote.hpp"
#include "oracles.hpp"

using namespace fedvote;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

Dataset indexed_dataset(const std::vector<std::size_t>& class_counts) {
    std::vector<double> f;
    std::vector<Label> labels;
    for (std::size_t c = 0; c < class_counts.size(); ++c) {
        for (std::size_t i = 0; i < class_counts[c]; ++i) {
            f.push_back(static_cast<double>(labels.size()));
            labels.push_back(static_cast<Label>(c));
        }
    }
    const std::size_t m = labels.size();
    return Dataset(Tensor({m, 1}, std::move(f)), std::move(labels), LabelSpace{});
}

Outcome fedavg_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    RngStream rng(1001, 0);
    const std::vector<Architecture> archs{Architecture::linear({16}, 4), Architecture::mlp({16}, 4),
                                          Architecture::cnn({16}, 4)};
    double worst = 0.0;
    for (int set = 0; set < 100; ++set) {
        const std::size_t p = 1 + rng.uniform_index(8);
        std::vector<ClientUpdate> ups;
        std::vector<std::vector<std::vector<double>>> thetas(archs.size());
        std::vector<double> w;
        for (std::size_t i = 0; i < p; ++i) {
            ClientUpdate u;
            u.client_id = i;
            u.sample_count = 1 + rng.uniform_index(2000);
            u.architectures = archs;
            for (std::size_t j = 0; j < archs.size(); ++j) {
                const BaseLearner m = oracle::random_model(archs[j], rng, 1.0);
                u.params.push_back(m.params());
                thetas[j].push_back(m.params().values.data());
            }
            w.push_back(static_cast<double>(u.sample_count));
            ups.push_back(std::move(u));
        }
        // arrival order scrambled; the reduction must not care
        rng.shuffle(std::span<ClientUpdate>(ups));
        const GlobalModel g = aggregate_fedavg(ups);
        for (std::size_t j = 0; j < archs.size(); ++j) {
            const auto expected = oracle::weighted_mean(thetas[j], w);
            const auto got = g.ensemble.member(j).params().values.values();
            for (std::size_t t = 0; t < expected.size(); ++t) worst = std::max(worst, std::abs(got[t] - expected[t]));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-12 && secs < 1.0, fmt("max |diff| %.3g, %.3f s", worst, secs)};
}

Outcome vote_oracles() {
    std::size_t cases = 0, bad = 0;
    for (std::size_t k = 1; k <= 5; ++k) {
        for (std::size_t n = 1; n <= 4; ++n) {
            std::vector<Label> v(k, 0);
            while (true) {
                ++cases;
                const Label mv = majority_vote(v);
                if (mv != oracle::mode(v) || weighted_vote(v, VoteWeights::uniform(k)) != mv) ++bad;
                std::size_t i = 0;
                while (i < k && ++v[i] == n) v[i++] = 0;
                if (i == k) break;
            }
        }
    }
    return {bad == 0, std::to_string(cases) + " vote vectors, " + std::to_string(bad) + " mismatches"};
}

Outcome gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    RngStream rng(1002, 0);
    std::string detail;
    bool pass = true;
    for (const auto& arch : {Architecture::linear({16}, 4), Architecture::mlp({16}, 4), Architecture::cnn({16}, 4)}) {
        double worst = 0.0;
        for (int point = 0; point < 50; ++point) {
            const BaseLearner m = oracle::random_model(arch, rng, 0.5);
            const Tensor x = rng_normal(rng, 5 * 16, 0.0, 1.0).reshaped({5, 16});
            std::vector<Label> y(5);
            for (auto& l : y) l = static_cast<Label>(rng.uniform_index(4));
            const auto r = oracle::compare_gradients(gradient(m, x, y).values.data(), oracle::numeric_gradient(m, x, y, 1e-5));
            worst = std::max(worst, r.max_rel_error);
        }
        pass &= worst < 1e-4;
        detail += std::string(to_string(arch.kind)) + fmt(" %.2e, ", worst);
    }
    const double secs = seconds_since(t0);
    return {pass && secs < 30.0, detail + fmt("%.2f s", secs)};
}

Outcome cross_entropy_anchors() {
    const double uniform = cross_entropy(Tensor::filled({8, 4}, 0.25), std::vector<Label>{0, 1, 2, 3, 3, 2, 1, 0});
    const double perfect = cross_entropy(Tensor::matrix({{1, 0, 0, 0}, {0, 0, 1, 0}}), std::vector<Label>{0, 2});
    const double hand =
        cross_entropy(Tensor::matrix({{0.5, 0.5, 0, 0}, {0.25, 0.25, 0.25, 0.25}}), std::vector<Label>{0, 3});
    const bool pass = std::abs(uniform - std::log(4.0)) <= 1e-9 && perfect == 0.0 && std::abs(hand - 1.039721) <= 1e-6;
    return {pass, fmt("uniform %.12f, perfect %g, hand %.7f", uniform, perfect, hand)};
}

Outcome desk_run() {
    const ExperimentConfig cfg; // 4 x 500 blobs, dim 16, separation 6, P=4, R=1, default training
    const auto t0 = std::chrono::steady_clock::now();
    const FederationRun run = run_federation(cfg);
    const double secs = seconds_since(t0);
    const double global = run.rounds.back().global_val.accuracy;
    bool ensemble_ok = true;
    double worst_margin = 1.0;
    for (const auto& c : run.clients) {
        const double ens = evaluate(c.ensemble, c.method, run.eval_set).accuracy;
        double best_member = 0.0;
        for (const auto& m : c.ensemble.members()) best_member = std::max(best_member, evaluate(m, run.eval_set).accuracy);
        worst_margin = std::min(worst_margin, ens - best_member);
        ensemble_ok &= ens >= best_member - 0.02;
    }
    return {global >= 0.90 && ensemble_ok && secs < 120.0,
            fmt("global accuracy %.4f, min(ensemble - best member) %+.4f over clients, %.2f s", global, worst_margin,
                secs)};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

Outcome cli_determinism() {
    const fs::path base = fs::temp_directory_path() / "fedvote_acceptance_det";
    fs::remove_all(base);
    auto run = [&](const std::string& name, const std::string& extra) {
        const std::string cmd = std::string(FEDVOTE_CLI_PATH) + " run --seed 42 --out " + (base / name).string() + " " +
                                extra + " >/dev/null 2>&1";
        const int s = std::system(cmd.c_str());
        return WIFEXITED(s) && WEXITSTATUS(s) == 0;
    };
    if (!run("a", "") || !run("b", "") || !run("c", "--parallel-clients")) return {false, "a run exited nonzero"};
    const std::string a = slurp(base / "a" / "rounds.jsonl");
    const bool same = !a.empty() && a == slurp(base / "b" / "rounds.jsonl");
    const bool threads = a == slurp(base / "c" / "rounds.jsonl");
    return {same && threads, std::string("rerun ") + (same ? "identical" : "DIFFERS") + ", parallel " +
                                 (threads ? "identical" : "DIFFERS") + ", " + std::to_string(a.size()) + " bytes"};
}

Outcome split_partition_arithmetic() {
    RngStream rng(1003, 0);
    const Dataset d = indexed_dataset({1621, 1645, 1775, 2000});
    const auto [train, test] = stratified_split(d, 0.8, rng);
    const bool split_ok = train.class_counts() == std::vector<std::size_t>{1296, 1316, 1420, 1600} &&
                          test.class_counts() == std::vector<std::size_t>{325, 329, 355, 400};

    const Partition p = partition_clients(d, 4, rng);
    bool balanced = true;
    std::vector<std::size_t> first_class;
    for (std::size_t c = 0; c < 4; ++c) {
        std::size_t lo = SIZE_MAX, hi = 0, sum = 0;
        for (const auto& shard : p.client_shards) {
            const std::size_t n = shard.class_counts()[c];
            lo = std::min(lo, n), hi = std::max(hi, n), sum += n;
            if (c == 0) first_class.push_back(n);
        }
        balanced &= hi - lo <= 1 && sum == d.class_counts()[c];
    }
    std::sort(first_class.begin(), first_class.end());
    const bool fixture = first_class == std::vector<std::size_t>{405, 405, 405, 406};
    return {split_ok && balanced && fixture, std::string("split ") + (split_ok ? "exact" : "WRONG") + ", shards " +
                                                 (balanced && fixture ? "within 1, 1621 -> 406/405/405/405" : "WRONG")};
}

Outcome average_of_equals() {
    RngStream data_rng(1004, 0);
    const Dataset d = generate_blobs(data_rng, 50, 16, 6.0);
    RngStream init(1004, 1);
    std::vector<BaseLearner> members;
    for (const auto& a : {Architecture::linear({16}, 4), Architecture::mlp({16}, 4), Architecture::cnn({16}, 4)})
        members.push_back(train_local(init_model(a, init), d, TrainConfig{0.05, 5, 32, 3}));
    const EnsembleModel client_ensemble(members);

    std::size_t mismatched = 0, checked = 0;
    for (std::size_t p = 1; p <= 6; ++p) {
        std::vector<ClientUpdate> ups;
        for (std::size_t i = 0; i < p; ++i) {
            ClientUpdate u;
            u.client_id = i;
            u.sample_count = 17 + 101 * i;
            for (const auto& m : members) {
                u.architectures.push_back(m.architecture());
                u.params.push_back(m.params());
            }
            ups.push_back(std::move(u));
        }
        const GlobalModel g = aggregate_fedavg(ups);
        const Tensor x = rng_normal(data_rng, 500 * 16, 0.0, 4.0).reshaped({500, 16});
        const auto want = ensemble_predict(client_ensemble, x, VoteMethod::Vote);
        const auto got = global_predict(g, {}, x);
        for (std::size_t i = 0; i < want.size(); ++i) mismatched += want[i] != got[i];
        for (std::size_t j = 0; j < members.size(); ++j) mismatched += g.ensemble.member(j).params() != members[j].params();
        checked += want.size();
    }
    return {mismatched == 0, std::to_string(checked) + " predictions over P = 1..6, " + std::to_string(mismatched) +
                                 " mismatches"};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"fedavg matches weighted-mean oracle", fedavg_oracle},
        {"vote oracles exhaustive", vote_oracles},
        {"gradient check", gradient_check},
        {"cross-entropy anchors", cross_entropy_anchors},
        {"desk-scale federated ensemble run", desk_run},
        {"run determinism (cli)", cli_determinism},
        {"split and partition arithmetic", split_partition_arithmetic},
        {"average of equals", average_of_equals},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
