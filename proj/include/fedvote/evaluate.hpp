#pragma once

#include <vector>

#include "fedvote/data/dataset.hpp"
#include "fedvote/ensemble/ensemble.hpp"
#include "fedvote/metrics/metrics.hpp"
#include "fedvote/models/learner.hpp"

namespace fedvote {

// Evaluation glue between models and metrics. An empty dataset yields an
// empty report rather than an error.

inline MetricsReport evaluate(const BaseLearner& model, const Dataset& d) {
    if (d.empty()) return report(ConfusionMatrix(d.label_space()), 0.0);
    const Tensor probs = forward(model, d.features());
    return report(confusion(d.labels(), argmax_rows(probs), d.label_space()), cross_entropy(probs, d.labels()));
}

/// Ensemble predictions by vote; the loss is that of the members' probability mixture.
inline MetricsReport evaluate(const EnsembleModel& e, VoteMethod method, const Dataset& d) {
    if (d.empty()) return report(ConfusionMatrix(d.label_space()), 0.0);
    const auto pred = ensemble_predict(e, d.features(), method);
    const double loss = cross_entropy(ensemble_mixture_probs(e, d.features()), d.labels());
    return report(confusion(d.labels(), pred, d.label_space()), loss);
}

} // namespace fedvote
