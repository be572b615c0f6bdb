#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "fedvote/metrics/metrics.hpp"

namespace fedvote {

/// One table row: precision/recall/F1 come from the validation report.
struct TableRow {
    std::string name;
    MetricsReport train;
    MetricsReport validation;
};

inline constexpr std::array<std::string_view, 8> kTableHeader = {
    "Algorithms",           "Precision (%)",     "Recall (%)",
    "F1-Score (%)",         "Training Accuracy (%)", "Training loss (%)",
    "Validation Accuracy (%)", "Validation loss (%)",
};

namespace detail {

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

/// Fixed-width text table in the column order of the reference results table.
/// Rates are printed as percentages, losses as raw mean cross-entropy, both to 2 decimals.
inline std::string render_table(const std::vector<TableRow>& rows) {
    std::vector<std::array<std::string, 8>> cells;
    cells.push_back({});
    for (std::size_t c = 0; c < kTableHeader.size(); ++c) cells.back()[c] = std::string(kTableHeader[c]);
    for (const auto& r : rows) {
        cells.push_back({r.name, detail::fixed2(100.0 * r.validation.precision),
                         detail::fixed2(100.0 * r.validation.recall), detail::fixed2(100.0 * r.validation.f1),
                         detail::fixed2(100.0 * r.train.accuracy), detail::fixed2(r.train.mean_loss),
                         detail::fixed2(100.0 * r.validation.accuracy), detail::fixed2(r.validation.mean_loss)});
    }
    std::array<std::size_t, 8> width{};
    for (const auto& row : cells)
        for (std::size_t c = 0; c < 8; ++c) width[c] = std::max(width[c], row[c].size());

    std::string out;
    auto rule = [&] {
        out += '+';
        for (std::size_t c = 0; c < 8; ++c) out += std::string(width[c] + 2, '-') + '+';
        out += '\n';
    };
    rule();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        out += '|';
        for (std::size_t c = 0; c < 8; ++c) {
            const auto& s = cells[i][c];
            const std::string pad(width[c] - s.size(), ' ');
            out += ' ' + (c == 0 ? s + pad : pad + s) + " |";
        }
        out += '\n';
        if (i == 0) rule();
    }
    rule();
    return out;
}

} // namespace fedvote
