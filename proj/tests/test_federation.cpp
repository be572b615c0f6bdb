#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fedvote/federation/run.hpp"
#include "oracles.hpp"

using namespace fedvote;

namespace {

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

EnsembleModel tiny_ensemble(std::size_t input) {
    RngStream rng(1, 1);
    return EnsembleModel({init_model(Architecture::linear({input}, 4), rng)});
}

ClientUpdate update(std::size_t id, std::vector<double> theta, std::size_t n) {
    const Architecture arch = Architecture::linear({1}, 2);
    ClientUpdate u;
    u.client_id = id;
    u.sample_count = n;
    u.architectures = {arch};
    const std::size_t k = theta.size();
    u.params = {ParameterVector{ArchKind::Linear, Tensor(Shape{k}, std::move(theta))}};
    return u;
}

// Rigged LINEAR member on 1-d input that always predicts `cls`.
BaseLearner constant_model(Label cls) {
    const Architecture arch = Architecture::linear({1}, 4);
    std::vector<double> p(arch.param_count(), 0.0);
    p[4 + cls] = 10.0;
    return BaseLearner(arch, ParameterVector{ArchKind::Linear, Tensor(Shape{p.size()}, p)});
}

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.synthetic = {60, 16, 6.0};
    cfg.clients = 3;
    cfg.train.epochs = 20;
    cfg.seed = 7;
    return cfg;
}

std::vector<std::string> round_lines(const FederationRun& run) {
    std::vector<std::string> out;
    for (const auto& r : run.rounds) out.push_back(to_json(r).dump());
    return out;
}

} // namespace

TEST(Distribute, FullScaleClassCountsAndValidationSplit) {
    RngStream rng(3, 0);
    const Dataset pool = indexed_dataset({1296, 1316, 1420, 1600});
    const auto clients = distribute(pool, 4, rng, tiny_ensemble(1));
    ASSERT_EQ(clients.size(), 4u);
    std::set<double> seen;
    std::size_t total = 0;
    for (const auto& c : clients) {
        const auto tr = c.train_set.class_counts(), va = c.val_set.class_counts();
        for (std::size_t k = 0; k < 4; ++k) {
            const std::size_t n = tr[k] + va[k];
            EXPECT_EQ(tr[k], static_cast<std::size_t>(std::floor(0.9 * static_cast<double>(n) + 1e-9)));
        }
        EXPECT_EQ(tr[0] + va[0], 324u); // 1296 / 4
        for (const auto* d : {&c.train_set, &c.val_set})
            for (std::size_t i = 0; i < d->size(); ++i) seen.insert(d->features()[i]);
        total += c.train_set.size() + c.val_set.size();
    }
    EXPECT_EQ(total, pool.size());
    EXPECT_EQ(seen.size(), pool.size());
}

TEST(Distribute, SingleClientAndDeterminism) {
    const Dataset pool = indexed_dataset({20, 20, 20, 20});
    RngStream a(4, 0), b(4, 0);
    const auto one = distribute(pool, 1, a, tiny_ensemble(1));
    EXPECT_EQ(one[0].train_set.size() + one[0].val_set.size(), 80u);
    EXPECT_EQ(one[0].val_set.size(), 8u);
    RngStream c(5, 0), d(5, 0);
    const auto x = distribute(pool, 3, c, tiny_ensemble(1)), y = distribute(pool, 3, d, tiny_ensemble(1));
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(x[i].train_set, y[i].train_set);
    EXPECT_THROW(distribute(indexed_dataset({20, 2, 20, 20}), 3, a, tiny_ensemble(1)), ArgumentError);
}

TEST(ClientRound, TrainsAndReportsSampleCount) {
    RngStream data_rng(6, 0);
    const Dataset pool = generate_blobs(data_rng, 80, 16, 6.0);
    RngStream rng(6, 1), init(6, 2);
    std::vector<BaseLearner> members;
    for (auto a : {Architecture::linear({16}, 4), Architecture::mlp({16}, 4), Architecture::cnn({16}, 4)})
        members.push_back(init_model(a, init));
    auto clients = distribute(pool, 2, rng, EnsembleModel(members));
    const RoundOptions opt{TrainConfig{0.05, 10, 16, 99}, 1, VoteWeighting::Validation};
    ClientState copy = clients[0];
    const ClientUpdate u = client_round(clients[0], opt);
    EXPECT_EQ(u.sample_count, clients[0].train_set.size());
    ASSERT_EQ(u.params.size(), 3u);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(u.params[j], clients[0].ensemble.member(j).params());
        EXPECT_NE(u.params[j], members[j].params());
    }
    EXPECT_GE(u.val_metrics.accuracy, 0.9);
    EXPECT_EQ(u.member_val_metrics.size(), 3u);
    // same inputs, same result
    const ClientUpdate again = client_round(copy, opt);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(again.params[j], u.params[j]);
}

TEST(ClientRound, FailuresCarryTheClientId) {
    ClientState c{5, indexed_dataset({0, 0, 0, 0}), indexed_dataset({1, 0, 0, 0}), tiny_ensemble(1)};
    try {
        client_round(c, RoundOptions{});
        FAIL() << "expected ClientError";
    } catch (const ClientError& e) {
        EXPECT_EQ(e.client_id(), 5u);
    }
}

TEST(FedAvg, WorkedExample) {
    const auto g = aggregate_fedavg({update(0, {1, 2, 0, 0}, 1), update(1, {3, 4, 0, 0}, 3)});
    const auto v = g.ensemble.member(0).params().values.values();
    EXPECT_DOUBLE_EQ(v[0], 2.5);
    EXPECT_DOUBLE_EQ(v[1], 3.5);
}

TEST(FedAvg, AverageOfEqualsIsExact) {
    RngStream rng(7, 0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> theta(4);
        for (double& x : theta) x = rng.standard_normal() * std::pow(10.0, static_cast<double>(rng.uniform_index(9)) - 4);
        std::vector<ClientUpdate> ups;
        const std::size_t p = 1 + rng.uniform_index(8);
        for (std::size_t i = 0; i < p; ++i) ups.push_back(update(i, theta, 1 + rng.uniform_index(1000)));
        const auto got = aggregate_fedavg(ups).ensemble.member(0).params().values.data();
        EXPECT_EQ(got, theta);
    }
}

TEST(FedAvg, MatchesWeightedMeanOracle) {
    RngStream rng(8, 0);
    for (int t = 0; t < 100; ++t) {
        const std::size_t p = 1 + rng.uniform_index(8);
        std::vector<std::vector<double>> thetas;
        std::vector<double> w;
        std::vector<ClientUpdate> ups;
        for (std::size_t i = 0; i < p; ++i) {
            std::vector<double> th(4);
            for (double& x : th) x = rng.standard_normal();
            const std::size_t n = 1 + rng.uniform_index(500);
            thetas.push_back(th);
            w.push_back(static_cast<double>(n));
            ups.push_back(update(i, th, n));
        }
        const auto expected = oracle::weighted_mean(thetas, w);
        const auto got = aggregate_fedavg(ups).ensemble.member(0).params().values.data();
        for (std::size_t k = 0; k < 4; ++k) {
            EXPECT_NEAR(got[k], expected[k], 1e-12);
            // convex combination: within the coordinate-wise hull
            double lo = thetas[0][k], hi = thetas[0][k];
            for (const auto& th : thetas) lo = std::min(lo, th[k]), hi = std::max(hi, th[k]);
            EXPECT_GE(got[k], lo - 1e-12);
            EXPECT_LE(got[k], hi + 1e-12);
        }
        // arrival order does not matter
        std::reverse(ups.begin(), ups.end());
        EXPECT_EQ(aggregate_fedavg(ups).ensemble.member(0).params().values.data(), got);
    }
}

TEST(FedAvg, CompatibilityErrors) {
    EXPECT_THROW(aggregate_fedavg({}), ArgumentError);
    EXPECT_THROW(aggregate_fedavg({update(0, {1, 2, 3, 4}, 1), update(1, {1, 2, 3, 4, 5, 6}, 1)}), CompatibilityError);
    EXPECT_THROW(aggregate_fedavg({update(0, {1, 2, 3, 4}, 1), update(0, {1, 2, 3, 4}, 1)}), CompatibilityError);
    EXPECT_THROW(aggregate_fedavg({update(0, {1, 2, 3, 4}, 0)}), CompatibilityError);
    ClientUpdate other = update(1, {1, 2, 3, 4}, 1);
    other.architectures[0] = Architecture::linear({2}, 1 + 1);
    EXPECT_THROW(aggregate_fedavg({update(0, {1, 2, 3, 4}, 1), other}), CompatibilityError);
}

TEST(GlobalPredict, ModeOfClientEnsembles) {
    auto client = [](std::size_t id, Label cls) {
        return ClientState{id, indexed_dataset({1, 1, 1, 1}), indexed_dataset({1, 1, 1, 1}),
                           EnsembleModel({constant_model(cls)})};
    };
    const GlobalModel g{EnsembleModel({constant_model(0)}), GlobalStrategy::ModeOfClientEnsembles, VoteMethod::Vote};
    const Tensor x = Tensor::matrix({{0.0}, {1.0}});
    EXPECT_EQ(global_predict(g, {client(0, 2), client(1, 2), client(2, 0)}, x), (std::vector<Label>{2, 2}));
    EXPECT_EQ(global_predict(g, {client(0, 3)}, x), (std::vector<Label>{3, 3}));
    const GlobalModel fedavg{EnsembleModel({constant_model(1)}), GlobalStrategy::FedAvgEnsemble, VoteMethod::Vote};
    EXPECT_EQ(global_predict(fedavg, {client(0, 3)}, x), (std::vector<Label>{1, 1}));
}

TEST(GlobalPredict, IdenticalClientsGiveTheClientPrediction) {
    RngStream rng(9, 0);
    const EnsembleModel e({oracle::random_model(Architecture::linear({16}, 4), rng, 1.0),
                           oracle::random_model(Architecture::mlp({16}, 4), rng, 1.0),
                           oracle::random_model(Architecture::cnn({16}, 4), rng, 1.0)});
    const Dataset d = indexed_dataset({1, 1, 1, 1});
    std::vector<ClientState> clients;
    for (std::size_t i = 0; i < 3; ++i) clients.push_back(ClientState{i, d, d, e});
    const Tensor x = rng_normal(rng, 50 * 16, 0, 2).reshaped({50, 16});
    const GlobalModel g{e, GlobalStrategy::ModeOfClientEnsembles, VoteMethod::Vote};
    EXPECT_EQ(global_predict(g, clients, x), ensemble_predict(e, x, VoteMethod::Vote));
}

TEST(RunFederation, SingleRoundStructure) {
    const auto run = run_federation(small_config());
    ASSERT_EQ(run.rounds.size(), 1u);
    EXPECT_EQ(run.rounds[0].round, 1u);
    EXPECT_EQ(run.rounds[0].clients.size(), 3u);
    EXPECT_EQ(run.train_pool.size() + run.eval_set.size(), 240u);
    EXPECT_EQ(run.eval_set.size(), 48u);
    EXPECT_GE(run.rounds[0].global_val.accuracy, 0.9);
    const auto j = to_json(run.rounds[0]);
    EXPECT_FALSE(j.dump().find("wall") != std::string::npos);
    EXPECT_EQ(j["clients"].size(), 3u);
}

TEST(RunFederation, FrozenSecondRoundKeepsGlobalParameters) {
    ExperimentConfig cfg = small_config();
    const Dataset data = load_experiment_data(cfg);
    RngStream split(cfg.seed, stream_id("data/split"));
    auto [pool, eval] = stratified_split(data, cfg.train_fraction, split);
    Federation fed(pool, cfg);
    fed.step(eval);
    const GlobalModel after1 = fed.global();
    TrainConfig frozen = cfg.train;
    frozen.learning_rate = 0.0;
    fed.step(eval, frozen);
    for (std::size_t j = 0; j < after1.ensemble.size(); ++j)
        EXPECT_EQ(fed.global().ensemble.member(j).params(), after1.ensemble.member(j).params());
    EXPECT_EQ(fed.rounds_done(), 2u);
}

TEST(RunFederation, DeterministicAndThreadingIndependent) {
    ExperimentConfig cfg = small_config();
    cfg.rounds = 2;
    const auto a = run_federation(cfg), b = run_federation(cfg);
    EXPECT_EQ(round_lines(a), round_lines(b));
    cfg.parallel_clients = true;
    const auto c = run_federation(cfg);
    EXPECT_EQ(round_lines(a), round_lines(c));
    for (std::size_t j = 0; j < 3; ++j)
        EXPECT_EQ(a.global_history.back().ensemble.member(j).params(), c.global_history.back().ensemble.member(j).params());
    cfg.seed = 8;
    EXPECT_NE(round_lines(run_federation(cfg)), round_lines(a));
}

TEST(Config, JsonRoundTripAndProblemCollection) {
    ExperimentConfig cfg = small_config();
    cfg.strategy = GlobalStrategy::ModeOfClientEnsembles;
    cfg.architectures = {ArchKind::Cnn, ArchKind::Linear};
    EXPECT_EQ(config_to_json(config_from_json(config_to_json(cfg))), config_to_json(cfg));
    try {
        config_from_json(nlohmann::json{{"clients", 0}, {"bogus", 1}, {"train", {{"epochs", "ten"}}}});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.problems().size(), 3u) << e.what();
    }
    EXPECT_THROW(config_from_json(nlohmann::json{{"architectures", {"MLP", "MLP"}}}), ConfigError);
}
