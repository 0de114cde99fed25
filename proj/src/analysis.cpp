// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "vtprune/error.hpp"
#include "vtprune/significance.hpp"

namespace vtprune {

ConcentrationReport concentration(std::span<const double> scores, double mass_threshold) {
    if (scores.empty()) {
        throw Error(ErrorKind::Degenerate, "concentration of an empty score vector");
    }
    if (!(mass_threshold > 0.0 && mass_threshold <= 1.0)) {
        std::ostringstream msg;
        msg << "mass threshold " << mass_threshold << " is outside (0, 1]";
        throw Error(ErrorKind::Validation, msg.str());
    }
    for (double s : scores) {
        if (!std::isfinite(s) || s < 0.0) {
            throw Error(ErrorKind::Value, "scores must be finite and non-negative");
        }
    }

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double total = 0.0;
    for (double s : sorted) {
        total += s;
    }
    if (total <= 0.0) {
        throw Error(ErrorKind::Degenerate, "scores carry no mass");
    }

    const std::size_t n = sorted.size();
    // Relative slack so prefix sums that equal the target in exact
    // arithmetic are not rejected over the last ulp.
    const double target = mass_threshold * total * (1.0 - 1e-12);
    std::size_t k = 0;
    double prefix = 0.0;
    while (k < n && prefix < target) {
        prefix += sorted[k];
        ++k;
    }

    // Sorted form of the pairwise formula: with ascending x_(i), i = 1..N,
    // sum_ij |x_i - x_j| = 2 * sum_i (2i - N - 1) x_(i).
    double gini = 0.0;
    if (sorted.front() != sorted.back()) {
        double weighted = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double rank = static_cast<double>(n - i);  // ascending 1-based rank of sorted[i]
            weighted += (2.0 * rank - static_cast<double>(n) - 1.0) * sorted[i];
        }
        gini = std::clamp(weighted / (static_cast<double>(n) * total), 0.0, 1.0);
    }

    ConcentrationReport report;
    report.mass_threshold = mass_threshold;
    report.tokens_needed = k;
    report.token_count = n;
    report.token_fraction = static_cast<double>(k) / static_cast<double>(n);
    report.gini = gini;
    return report;
}

std::vector<LayerReport> layer_sweep(std::span<const std::filesystem::path> paths, double mass_threshold,
                                     const LoadOptions& options) {
    std::vector<LayerReport> reports;
    reports.reserve(paths.size());
    std::optional<std::size_t> common_tokens;
    for (const auto& path : paths) {
        LayerReport entry;
        entry.path = path;
        try {
            AttentionMaps maps = load_attention(path, options);
            if (common_tokens && *common_tokens != maps.tokens()) {
                throw Error(ErrorKind::Shape, path.string() + ": token count " + std::to_string(maps.tokens()) +
                                                  " differs from " + std::to_string(*common_tokens));
            }
            common_tokens = maps.tokens();
            SignificanceScores sig = compute_significance(maps);
            entry.report = concentration(sig.scores, mass_threshold);
        } catch (const Error& e) {
            entry.error = e.what();
        }
        reports.push_back(std::move(entry));
    }
    return reports;
}

TokenBudgetReport token_budget(std::size_t visual, std::size_t textual) {
    if (visual == 0 && textual == 0) {
        throw Error(ErrorKind::Degenerate, "token budget needs at least one token");
    }
    TokenBudgetReport report;
    report.visual_tokens = visual;
    report.textual_tokens = textual;
    report.visual_fraction = static_cast<double>(visual) / static_cast<double>(visual + textual);
    return report;
}

}  // namespace vtprune
