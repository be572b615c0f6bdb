#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fedvote/data/dataset.hpp"
#include "fedvote/error.hpp"

namespace fedvote {

/// counts[t][p]: samples of true class t predicted as p.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(LabelSpace labels)
        : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

    const LabelSpace& label_space() const noexcept { return labels_; }
    std::size_t num_classes() const noexcept { return labels_.size(); }

    std::uint64_t operator()(std::size_t t, std::size_t p) const { return counts_[t * num_classes() + p]; }
    std::uint64_t& operator()(std::size_t t, std::size_t p) { return counts_[t * num_classes() + p]; }

    std::uint64_t total() const {
        std::uint64_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }

    std::uint64_t trace() const {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < num_classes(); ++i) s += (*this)(i, i);
        return s;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    LabelSpace labels_;
    std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion(std::span<const Label> truth, std::span<const Label> predicted,
                                 const LabelSpace& labels) {
    if (truth.size() != predicted.size()) {
        throw ArgumentError("confusion got " + std::to_string(truth.size()) + " true labels but " +
                            std::to_string(predicted.size()) + " predictions");
    }
    ConfusionMatrix cm(labels);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= labels.size() || predicted[i] >= labels.size()) {
            throw ArgumentError("label out of range at sample " + std::to_string(i));
        }
        ++cm(truth[i], predicted[i]);
    }
    return cm;
}

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;     // true instances
    bool precision_undefined = false; // no predictions of this class
    bool recall_undefined = false;    // no instances of this class

    friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Macro-averaged classification metrics. Zero denominators yield 0 and set a flag.
struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double mean_loss = 0.0;
    std::uint64_t num_samples = 0;
    bool empty = false;
    std::vector<std::string> class_names;
    std::vector<ClassMetrics> per_class;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline double harmonic_mean(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

inline MetricsReport report(const ConfusionMatrix& cm, double mean_loss) {
    const std::size_t n = cm.num_classes();
    MetricsReport r;
    r.mean_loss = mean_loss;
    r.num_samples = cm.total();
    r.class_names = cm.label_space().names();
    r.per_class.resize(n);
    if (r.num_samples == 0) {
        r.empty = true;
        for (auto& c : r.per_class) c.precision_undefined = c.recall_undefined = true;
        return r;
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::uint64_t predicted = 0, actual = 0;
        for (std::size_t i = 0; i < n; ++i) {
            predicted += cm(i, k);
            actual += cm(k, i);
        }
        const double tp = static_cast<double>(cm(k, k));
        auto& c = r.per_class[k];
        c.support = actual;
        c.precision_undefined = predicted == 0;
        c.recall_undefined = actual == 0;
        c.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
        c.recall = actual ? tp / static_cast<double>(actual) : 0.0;
        c.f1 = harmonic_mean(c.precision, c.recall);
        r.precision += c.precision;
        r.recall += c.recall;
        r.f1 += c.f1;
    }
    r.precision /= static_cast<double>(n);
    r.recall /= static_cast<double>(n);
    r.f1 /= static_cast<double>(n);
    r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(r.num_samples);
    return r;
}

// Report JSON mirrors MetricsReport field by field.

inline nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json per_class = nlohmann::json::array();
    for (std::size_t k = 0; k < r.per_class.size(); ++k) {
        const auto& c = r.per_class[k];
        per_class.push_back({{"class", r.class_names[k]},
                             {"precision", c.precision},
                             {"recall", c.recall},
                             {"f1", c.f1},
                             {"support", c.support},
                             {"precision_undefined", c.precision_undefined},
                             {"recall_undefined", c.recall_undefined}});
    }
    return {{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall},
            {"f1", r.f1},             {"mean_loss", r.mean_loss}, {"num_samples", r.num_samples},
            {"empty", r.empty},       {"per_class", per_class}};
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
    MetricsReport r;
    try {
        r.accuracy = j.at("accuracy").get<double>();
        r.precision = j.at("precision").get<double>();
        r.recall = j.at("recall").get<double>();
        r.f1 = j.at("f1").get<double>();
        r.mean_loss = j.at("mean_loss").get<double>();
        r.num_samples = j.at("num_samples").get<std::uint64_t>();
        r.empty = j.at("empty").get<bool>();
        for (const auto& c : j.at("per_class")) {
            r.class_names.push_back(c.at("class").get<std::string>());
            r.per_class.push_back({c.at("precision").get<double>(), c.at("recall").get<double>(),
                                   c.at("f1").get<double>(), c.at("support").get<std::uint64_t>(),
                                   c.at("precision_undefined").get<bool>(), c.at("recall_undefined").get<bool>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("metrics report JSON: ") + e.what());
    }
    return r;
}

/// CSV with a header row and a leading column of class names.
inline std::string confusion_csv(const ConfusionMatrix& cm) {
    std::string out = "true\\pred";
    for (const auto& name : cm.label_space().names()) out += "," + name;
    out += "\n";
    for (std::size_t t = 0; t < cm.num_classes(); ++t) {
        out += cm.label_space().name(t);
        for (std::size_t p = 0; p < cm.num_classes(); ++p) out += "," + std::to_string(cm(t, p));
        out += "\n";
    }
    return out;
}

} // namespace fedvote
