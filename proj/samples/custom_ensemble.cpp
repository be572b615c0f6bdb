// Building blocks without the federation: train three architectures on one
// dataset, vote them, and compare plain and accuracy-weighted voting.
#include <iostream>

#include "fedvote/fedvote.hpp"

using namespace fedvote;

int main() {
    RngStream data_rng(1, stream_id("data/blobs"));
    const Dataset all = generate_blobs(data_rng, 200, 16, 3.0); // closer blobs, so members disagree
    RngStream split_rng(1, stream_id("data/split"));
    const auto [train, test] = stratified_split(all, 0.8, split_rng);

    std::vector<BaseLearner> members;
    RngStream init_rng(1, stream_id("model/init"));
    for (const auto& arch : {Architecture::linear({16}, 4), Architecture::mlp({16}, 4), Architecture::cnn({16}, 4)}) {
        TrainLog log;
        members.push_back(train_local(init_model(arch, init_rng), train, TrainConfig{0.05, 20, 32, 1}, &log));
        std::cout << to_string(arch.kind) << ": final epoch loss " << log.epoch_loss.back() << ", test accuracy "
                  << accuracy(members.back(), test) << "\n";
    }

    const EnsembleModel plain(members);
    const EnsembleModel weighted(members, weights_from_validation(members, train));
    std::cout << "vote:          " << evaluate(plain, VoteMethod::Vote, test).accuracy << "\n";
    std::cout << "weighted vote: " << evaluate(weighted, VoteMethod::WeightedVote, test).accuracy << "\n";

    const auto cm = confusion(test.labels(), ensemble_predict(plain, test.features(), VoteMethod::Vote),
                              test.label_space());
    std::cout << confusion_csv(cm);
}
