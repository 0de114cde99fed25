// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vtprune/error.hpp"
#include "vtprune/significance.hpp"

namespace vtprune {

enum class Strategy { Rank, Row };

/// How token scores are produced before selection.
enum class SignificanceMode {
    Variance,      // keep the higher-variance axis mean
    AntiVariance,  // ablation: keep the lower-variance axis mean
    Pool4,         // ablation: no scores, one token per 2x2 patch block
};

/// What actually produced a selection. Pool4 bypasses the configured strategy.
enum class SelectionMethod { Rank, Row, Pool4 };

std::string_view to_string(Strategy strategy);
std::string_view to_string(SignificanceMode mode);
std::string_view to_string(SelectionMethod method);

std::optional<Strategy> parse_strategy(std::string_view text);
std::optional<SignificanceMode> parse_significance_mode(std::string_view text);

struct PruneConfig {
    double ratio = 1.0;  // retention fraction in (0, 1]
    Strategy strategy = Strategy::Rank;
    bool reorder = true;
    SignificanceMode significance_mode = SignificanceMode::Variance;

    /// Throws Error{Validation} when ratio is outside (0, 1].
    void validate() const;
};

struct PrunedSelection {
    std::vector<std::size_t> kept;
    std::size_t n_original = 0;
    std::optional<std::size_t> grid_side;
    SelectionMethod method = SelectionMethod::Rank;
    std::optional<std::vector<std::size_t>> rows_kept;
};

/// max(1, floor(total * ratio)). A 1e-9 slack absorbs binary rounding of
/// decimal ratios, so 0.29 * 100 counts as 29.
std::size_t keep_count(std::size_t total, double ratio);

/// Side n with n * n == tokens, if one exists.
std::optional<std::size_t> exact_grid_side(std::size_t tokens);

/// Top keep_count(N, ratio) tokens by score; ties go to the lower index.
PrunedSelection rank_select(std::span<const double> scores, const PruneConfig& config);
PrunedSelection rank_select(const SignificanceScores& scores, const PruneConfig& config);

/// Whole raster rows of the sqrt(N) x sqrt(N) grid ranked by row sum.
PrunedSelection row_select(std::span<const double> scores, const PruneConfig& config);
PrunedSelection row_select(const SignificanceScores& scores, const PruneConfig& config);

/// Top-left token of every 2x2 block; the pooling ablation baseline.
PrunedSelection pool_select(std::size_t n_tokens, const PruneConfig& config);

/// Ascending copy of `indices`. Throws Error{Validation} on duplicates.
std::vector<std::size_t> reorder(std::span<const std::size_t> indices);

/// Gathers the kept tokens, in kept order.
template <typename T>
std::vector<T> apply_selection(std::span<const T> tokens, const PrunedSelection& selection) {
    if (tokens.size() != selection.n_original) {
        throw Error(ErrorKind::Shape, "selection built for " + std::to_string(selection.n_original) +
                                          " tokens applied to " + std::to_string(tokens.size()));
    }
    std::vector<T> out;
    out.reserve(selection.kept.size());
    for (std::size_t index : selection.kept) {
        out.push_back(tokens[index]);
    }
    return out;
}

/// Scores for the configured significance mode. Pool4 has none and throws.
SignificanceScores score_tokens(const AttentionMaps& maps, SignificanceMode mode);

/// One pass of the full pipeline: score, select, reorder.
struct PruneResult {
    PrunedSelection selection;
    std::optional<SignificanceScores> significance;  // absent for Pool4
};

PruneResult prune(const AttentionMaps& maps, const PruneConfig& config);

}  // namespace vtprune
