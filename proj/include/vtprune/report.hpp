// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "vtprune/analysis.hpp"
#include "vtprune/cost_model.hpp"
#include "vtprune/pruning.hpp"

namespace vtprune {

// nlohmann::json keeps object keys in a std::map, so every document below
// serializes with sorted keys.
using Json = nlohmann::json;

/// {n_original, strategy, ratio, kept, rows_kept?, chosen_axis, var1, var2}.
/// Without significance (pool4) chosen_axis is "none" and the variances are null.
Json selection_to_json(const PrunedSelection& selection, double ratio,
                       const std::optional<SignificanceScores>& significance);

Json concentration_to_json(const ConcentrationReport& report);
Json layer_reports_to_json(std::span<const LayerReport> reports);
Json token_budget_to_json(const TokenBudgetReport& report);

/// {tokens_before, tokens_after, prefill_speedup, decode_speedup, model}.
Json cost_to_json(const CostEstimate& estimate);

/// Pretty-printed with two-space indent and a trailing newline.
std::string dump_json(const Json& document);

struct SweepRow {
    double ratio = 0.0;
    std::size_t kept = 0;
    std::optional<std::size_t> rows_kept;
    CostEstimate cost;
};

std::string format_layer_table(std::span<const LayerReport> reports);
std::string format_token_budget(const TokenBudgetReport& report);
std::string format_cost_report(const CostEstimate& estimate, double ratio);
std::string format_sweep_table(std::span<const SweepRow> rows);

/// Caption attached to every cost-model printout.
std::string cost_model_caveat();

}  // namespace vtprune
