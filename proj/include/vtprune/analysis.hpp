// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vtprune/tensor_io.hpp"

namespace vtprune {

/// How concentrated a score vector is.
///
/// `token_fraction` is k / N for the smallest k such that the k largest
/// scores hold at least `mass_threshold` of the total. `gini` is the mean
/// absolute difference over all ordered pairs divided by twice the mean.
struct ConcentrationReport {
    double mass_threshold = 0.0;
    double token_fraction = 0.0;
    double gini = 0.0;
    std::size_t tokens_needed = 0;  // k
    std::size_t token_count = 0;    // N
};

ConcentrationReport concentration(std::span<const double> scores, double mass_threshold);

struct LayerReport {
    std::filesystem::path path;
    std::optional<ConcentrationReport> report;
    std::optional<std::string> error;  // set iff report is empty
};

/// Significance then concentration for each file, in input order. A file
/// that fails to load, or whose token count differs from the first
/// successfully loaded file, yields an error entry and the sweep continues.
std::vector<LayerReport> layer_sweep(std::span<const std::filesystem::path> paths, double mass_threshold,
                                     const LoadOptions& options = {});

struct TokenBudgetReport {
    std::size_t visual_tokens = 0;
    std::size_t textual_tokens = 0;
    double visual_fraction = 0.0;
};

TokenBudgetReport token_budget(std::size_t visual, std::size_t textual);

}  // namespace vtprune
