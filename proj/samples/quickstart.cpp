// Smallest end-to-end use of the library: a 4-client, 1-round federated run
// on synthetic blobs, then the summary table.
#include <iostream>

#include "fedvote/fedvote.hpp"

int main() {
    fedvote::ExperimentConfig cfg; // 500 samples per class, 16 features, 4 clients
    cfg.rounds = 2;

    const auto run = fedvote::run_federation(cfg, [](const fedvote::RoundRecord& r, const fedvote::Federation&) {
        std::cout << "round " << r.round << ": global accuracy " << r.global_val.accuracy << "\n";
    });

    const auto& client0 = run.clients.front();
    std::vector<fedvote::TableRow> rows;
    rows.push_back({"Global Model (FL)", fedvote::evaluate_global(run.global_history.back(), run.clients, run.train_pool),
                    fedvote::evaluate_global(run.global_history.back(), run.clients, run.eval_set)});
    rows.push_back({"Ensemble Model", fedvote::evaluate(client0.ensemble, client0.method, client0.train_set),
                    fedvote::evaluate(client0.ensemble, client0.method, run.eval_set)});
    std::cout << fedvote::render_table(rows);
}
