// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace vtprune {

namespace {

// Indices of the `count` largest values, in descending value order with
// lower indices first among equals.
std::vector<std::size_t> top_indices(std::span<const double> values, std::size_t count) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_value_then_index = [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) {
            return values[a] > values[b];
        }
        return a < b;
    };
    count = std::min(count, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                      by_value_then_index);
    order.resize(count);
    return order;
}

std::size_t require_grid_side(std::size_t tokens) {
    auto side = exact_grid_side(tokens);
    if (!side) {
        throw Error(ErrorKind::Grid, "token count " + std::to_string(tokens) + " is not a perfect square");
    }
    return *side;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
    return strategy == Strategy::Rank ? "rank" : "row";
}

std::string_view to_string(SignificanceMode mode) {
    switch (mode) {
    case SignificanceMode::Variance:
        return "variance";
    case SignificanceMode::AntiVariance:
        return "anti-variance";
    case SignificanceMode::Pool4:
        return "pool4";
    }
    return "unknown";
}

std::string_view to_string(SelectionMethod method) {
    switch (method) {
    case SelectionMethod::Rank:
        return "rank";
    case SelectionMethod::Row:
        return "row";
    case SelectionMethod::Pool4:
        return "pool4";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
    if (text == "rank") {
        return Strategy::Rank;
    }
    if (text == "row") {
        return Strategy::Row;
    }
    return std::nullopt;
}

std::optional<SignificanceMode> parse_significance_mode(std::string_view text) {
    if (text == "variance") {
        return SignificanceMode::Variance;
    }
    if (text == "anti-variance") {
        return SignificanceMode::AntiVariance;
    }
    if (text == "pool4") {
        return SignificanceMode::Pool4;
    }
    return std::nullopt;
}

void PruneConfig::validate() const {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        std::ostringstream msg;
        msg << "retention ratio " << ratio << " is outside (0, 1]";
        throw Error(ErrorKind::Validation, msg.str());
    }
}

std::size_t keep_count(std::size_t total, double ratio) {
    if (total == 0 || !(ratio > 0.0 && ratio <= 1.0)) {
        std::ostringstream msg;
        msg << "keep_count needs total >= 1 and ratio in (0, 1], got (" << total << ", " << ratio << ")";
        throw Error(ErrorKind::Validation, msg.str());
    }
    double product = static_cast<double>(total) * ratio;
    auto count = static_cast<std::size_t>(std::floor(product + 1e-9));
    return std::clamp<std::size_t>(count, 1, total);
}

std::optional<std::size_t> exact_grid_side(std::size_t tokens) {
    auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(tokens))));
    // Correct any off-by-one from the floating square root.
    while (side > 0 && side * side > tokens) {
        --side;
    }
    while ((side + 1) * (side + 1) <= tokens) {
        ++side;
    }
    if (side * side != tokens) {
        return std::nullopt;
    }
    return side;
}

PrunedSelection rank_select(std::span<const double> scores, const PruneConfig& config) {
    config.validate();
    if (scores.empty()) {
        throw Error(ErrorKind::Validation, "cannot select from an empty score vector");
    }
    PrunedSelection sel;
    sel.n_original = scores.size();
    sel.method = SelectionMethod::Rank;
    sel.kept = top_indices(scores, keep_count(scores.size(), config.ratio));
    if (config.reorder) {
        sel.kept = reorder(sel.kept);
    }
    return sel;
}

PrunedSelection rank_select(const SignificanceScores& scores, const PruneConfig& config) {
    return rank_select(std::span<const double>(scores.scores), config);
}

PrunedSelection row_select(std::span<const double> scores, const PruneConfig& config) {
    config.validate();
    if (scores.empty()) {
        throw Error(ErrorKind::Validation, "cannot select from an empty score vector");
    }
    const std::size_t side = require_grid_side(scores.size());

    std::vector<double> row_sums(side, 0.0);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            row_sums[r] += scores[r * side + c];
        }
    }

    std::vector<std::size_t> rows = top_indices(row_sums, keep_count(side, config.ratio));
    if (config.reorder) {
        std::sort(rows.begin(), rows.end());
    }

    PrunedSelection sel;
    sel.n_original = scores.size();
    sel.grid_side = side;
    sel.method = SelectionMethod::Row;
    sel.kept.reserve(rows.size() * side);
    for (std::size_t r : rows) {
        for (std::size_t c = 0; c < side; ++c) {
            sel.kept.push_back(r * side + c);
        }
    }
    sel.rows_kept = std::move(rows);
    return sel;
}

PrunedSelection row_select(const SignificanceScores& scores, const PruneConfig& config) {
    return row_select(std::span<const double>(scores.scores), config);
}

PrunedSelection pool_select(std::size_t n_tokens, const PruneConfig& config) {
    config.validate();
    if (config.significance_mode != SignificanceMode::Pool4) {
        throw Error(ErrorKind::Validation, "pool_select requires the pool4 significance mode");
    }
    auto side = exact_grid_side(n_tokens);
    if (n_tokens == 0 || !side || *side % 2 != 0) {
        throw Error(ErrorKind::Grid,
                    "token count " + std::to_string(n_tokens) + " does not tile a square grid with 2x2 blocks");
    }
    PrunedSelection sel;
    sel.n_original = n_tokens;
    sel.grid_side = *side;
    sel.method = SelectionMethod::Pool4;
    sel.kept.reserve(n_tokens / 4);
    for (std::size_t r = 0; r < *side; r += 2) {
        for (std::size_t c = 0; c < *side; c += 2) {
            sel.kept.push_back(r * *side + c);
        }
    }
    return sel;
}

std::vector<std::size_t> reorder(std::span<const std::size_t> indices) {
    std::vector<std::size_t> sorted(indices.begin(), indices.end());
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end()) {
        throw Error(ErrorKind::Validation, "duplicate token index " + std::to_string(*dup));
    }
    return sorted;
}

SignificanceScores score_tokens(const AttentionMaps& maps, SignificanceMode mode) {
    switch (mode) {
    case SignificanceMode::Variance:
        return compute_significance(maps);
    case SignificanceMode::AntiVariance:
        return compute_significance_ablated(maps);
    case SignificanceMode::Pool4:
        break;
    }
    throw Error(ErrorKind::Validation, "pool4 mode does not score tokens");
}

PruneResult prune(const AttentionMaps& maps, const PruneConfig& config) {
    config.validate();
    PruneResult result;
    if (config.significance_mode == SignificanceMode::Pool4) {
        result.selection = pool_select(maps.tokens(), config);
        return result;
    }
    result.significance = score_tokens(maps, config.significance_mode);
    result.selection = config.strategy == Strategy::Rank ? rank_select(*result.significance, config)
                                                         : row_select(*result.significance, config);
    return result;
}

}  // namespace vtprune
