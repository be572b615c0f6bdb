#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "fedvote/data/synthetic.hpp"
#include "fedvote/ensemble/ensemble.hpp"
#include "oracles.hpp"

using namespace fedvote;

namespace {

using Votes = std::vector<Label>;

// Enumerates every vote vector of length k over n classes.
template <class F>
void for_each_vote_vector(std::size_t k, std::size_t n, F&& f) {
    Votes v(k, 0);
    while (true) {
        f(v);
        std::size_t i = 0;
        while (i < k && ++v[i] == n) v[i++] = 0;
        if (i == k) return;
    }
}

// A LINEAR model over input dim 1 that always predicts `cls` (bias-only).
BaseLearner constant_model(std::size_t n, Label cls) {
    const Architecture arch = Architecture::linear({1}, n);
    std::vector<double> p(arch.param_count(), 0.0);
    p[n + cls] = 10.0;
    return BaseLearner(arch, ParameterVector{ArchKind::Linear, Tensor(Shape{p.size()}, p)});
}

} // namespace

TEST(MajorityVote, Examples) {
    EXPECT_EQ(majority_vote(Votes{1, 1, 3}), 1);
    EXPECT_EQ(majority_vote(Votes{2, 0, 1}), 0);
    EXPECT_EQ(majority_vote(Votes{3, 2, 3, 2}), 2);
    EXPECT_EQ(majority_vote(Votes{3}), 3);
    EXPECT_THROW(majority_vote(Votes{}), ArgumentError);
}

TEST(WeightedVote, Examples) {
    EXPECT_EQ(weighted_vote(Votes{0, 1, 1}, VoteWeights({0.9, 0.5, 0.3})), 0);
    EXPECT_EQ(weighted_vote(Votes{0, 1, 1}, VoteWeights({0.5, 0.5, 0.3})), 1);
    EXPECT_EQ(weighted_vote(Votes{2, 1}, VoteWeights({1.0, 1.0})), 1);
    EXPECT_THROW(weighted_vote(Votes{0, 1}, VoteWeights({1.0})), ArgumentError);
    EXPECT_THROW(VoteWeights({0.0, 0.0}), ArgumentError);
    EXPECT_THROW(VoteWeights({1.0, -0.1}), ArgumentError);
}

TEST(MajorityVote, ExhaustiveAgainstBruteForceMode) {
    for (std::size_t k = 1; k <= 5; ++k)
        for (std::size_t n = 1; n <= 4; ++n)
            for_each_vote_vector(k, n, [&](const Votes& v) {
                ASSERT_EQ(majority_vote(v), oracle::mode(v));
                ASSERT_EQ(weighted_vote(v, VoteWeights::uniform(k)), oracle::mode(v));
            });
}

TEST(WeightedVote, ScaleAndPermutationInvariance) {
    RngStream rng(31, 0);
    for (std::size_t k = 1; k <= 5; ++k)
        for_each_vote_vector(k, 4, [&](const Votes& v) {
            std::vector<double> w(k);
            for (double& x : w) x = 0.05 + rng.uniform();
            const Label base = weighted_vote(v, VoteWeights(w));
            std::vector<double> scaled = w;
            for (double& x : scaled) x *= 8.0; // power of two keeps the sums exact
            ASSERT_EQ(weighted_vote(v, VoteWeights(scaled)), base);

            std::vector<std::size_t> perm(k);
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(std::span<std::size_t>(perm));
            Votes pv(k);
            std::vector<double> pw(k);
            for (std::size_t j = 0; j < k; ++j) pv[j] = v[perm[j]], pw[j] = w[perm[j]];
            ASSERT_EQ(weighted_vote(pv, VoteWeights(pw)), base);
        });
}

TEST(MajorityVote, PermutationInvariance) {
    for_each_vote_vector(5, 3, [&](const Votes& v) {
        Votes r(v.rbegin(), v.rend());
        ASSERT_EQ(majority_vote(r), majority_vote(v));
    });
}

TEST(Ensemble, SingleMemberIsIdentity) {
    RngStream rng(32, 0);
    const BaseLearner m = oracle::random_model(Architecture::mlp({16}, 4), rng, 1.0);
    const EnsembleModel e({m});
    const Tensor x = rng_normal(rng, 40 * 16, 0, 2).reshaped({40, 16});
    EXPECT_EQ(ensemble_predict(e, x, VoteMethod::Vote), predict(m, x));
    EXPECT_EQ(ensemble_predict(e, x, VoteMethod::WeightedVote), predict(m, x));
}

TEST(Ensemble, RiggedMembersVoteOne) {
    const EnsembleModel e({constant_model(4, 1), constant_model(4, 1), constant_model(4, 3)});
    const Tensor x = Tensor::matrix({{0.0}, {5.0}, {-3.0}});
    EXPECT_EQ(ensemble_predict(e, x, VoteMethod::Vote), (Votes{1, 1, 1}));
}

TEST(Ensemble, MatchesPerInstanceBruteForce) {
    RngStream rng(33, 0);
    const std::vector<BaseLearner> members{
        oracle::random_model(Architecture::linear({16}, 4), rng, 1.0),
        oracle::random_model(Architecture::mlp({16}, 4), rng, 1.0),
        oracle::random_model(Architecture::cnn({16}, 4), rng, 1.0),
    };
    const EnsembleModel e(members, VoteWeights({0.9, 0.5, 0.45}));
    const Tensor x = rng_normal(rng, 100 * 16, 0, 3).reshaped({100, 16});
    const auto got = ensemble_predict(e, x, VoteMethod::Vote);
    const auto got_w = ensemble_predict(e, x, VoteMethod::WeightedVote);
    for (std::size_t i = 0; i < 100; ++i) {
        const Tensor xi({1, 16}, std::vector<double>(x.row(i).begin(), x.row(i).end()));
        Votes v;
        std::vector<double> score(4, 0.0);
        const double w[3] = {0.9, 0.5, 0.45};
        for (std::size_t j = 0; j < 3; ++j) {
            const Tensor p = forward(members[j], xi);
            const Label c = static_cast<Label>(std::max_element(p.values().begin(), p.values().end()) - p.values().begin());
            v.push_back(c);
            score[c] += w[j];
        }
        EXPECT_EQ(got[i], oracle::mode(v));
        EXPECT_EQ(got_w[i], static_cast<Label>(std::max_element(score.begin(), score.end()) - score.begin()));
    }
}

TEST(Ensemble, ConstructionErrors) {
    EXPECT_THROW(EnsembleModel(std::vector<BaseLearner>{}), ArgumentError);
    EXPECT_THROW(EnsembleModel({constant_model(4, 0), constant_model(3, 0)}), CompatibilityError);
    EXPECT_THROW(EnsembleModel({constant_model(4, 0)}, VoteWeights({1.0, 1.0})), ArgumentError);
}

TEST(Ensemble, MixtureProbabilitiesAreAverages) {
    RngStream rng(34, 0);
    const BaseLearner a = oracle::random_model(Architecture::linear({16}, 4), rng, 1.0);
    const BaseLearner b = oracle::random_model(Architecture::mlp({16}, 4), rng, 1.0);
    const Tensor x = rng_normal(rng, 5 * 16, 0, 1).reshaped({5, 16});
    const Tensor pa = forward(a, x), pb = forward(b, x), mix = ensemble_mixture_probs(EnsembleModel({a, b}), x);
    for (std::size_t i = 0; i < mix.size(); ++i) EXPECT_NEAR(mix[i], 0.5 * (pa[i] + pb[i]), 1e-15);
}

TEST(VoteWeightsFromValidation, AccuracyWithFloor) {
    // Members: always 0, always 1, always 3; validation labels 0,0,0,1 -> accuracies .75, .25, 0
    const Dataset val(Tensor::matrix({{0.0}, {1.0}, {2.0}, {3.0}}), {0, 0, 0, 1}, LabelSpace());
    const auto w = weights_from_validation({constant_model(4, 0), constant_model(4, 1), constant_model(4, 3)}, val);
    EXPECT_EQ(w.values(), (std::vector<double>{0.75, 0.25, kMinVoteWeight}));
    EXPECT_THROW(weights_from_validation({constant_model(4, 0)}, val.subset({})), ArgumentError);
}

TEST(VoteWeightsFromValidation, HighAccuracyMemberOutvotesTwoWeakOnes) {
    // Accuracies [0.9, 0.5, 0.5]-style: one strong member disagreeing with two weak ones that agree.
    EXPECT_EQ(weighted_vote(Votes{2, 0, 0}, VoteWeights({0.9, 0.5, 0.3})), 2);
    EXPECT_EQ(majority_vote(Votes{2, 0, 0}), 0);
}

TEST(EnsembleCheckpoint, RoundTrip) {
    RngStream rng(35, 0);
    const EnsembleModel e({oracle::random_model(Architecture::linear({16}, 4), rng, 1.0),
                           oracle::random_model(Architecture::mlp({16}, 4), rng, 1.0),
                           oracle::random_model(Architecture::cnn({16}, 4), rng, 1.0)},
                          VoteWeights({0.9, 0.5, 0.125}));
    const auto dir = std::filesystem::temp_directory_path() / "fedvote_ens_ckpt";
    std::filesystem::remove_all(dir);
    save_ensemble(e, VoteMethod::WeightedVote, dir);
    const auto back = load_ensemble(dir);
    EXPECT_EQ(back.method, VoteMethod::WeightedVote);
    EXPECT_EQ(back.model.weights(), e.weights());
    ASSERT_EQ(back.model.size(), 3u);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_EQ(back.model.member(j).params(), e.member(j).params());
        EXPECT_EQ(back.model.member(j).architecture(), e.member(j).architecture());
    }
    EXPECT_TRUE(std::filesystem::exists(dir / "member_1_MLP" / "model.json"));

    auto j = io::read_json(dir / "ensemble.json");
    j["method"] = "plurality";
    io::write_json(dir / "ensemble.json", j);
    EXPECT_THROW(load_ensemble(dir), FormatError);
}
