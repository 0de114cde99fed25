// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/report.hpp"

#include <iomanip>
#include <sstream>

namespace vtprune {

namespace {

std::string fixed(double value, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << value;
    return out.str();
}

// Renders rows as left-aligned columns separated by two spaces.
std::string align(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        widths.resize(std::max(widths.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::ostringstream out;
    for (const auto& row : rows) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) {
                line.append(widths[c] - row[c].size() + 2, ' ');
            }
        }
        out << line << '\n';
    }
    return out.str();
}

}  // namespace

Json selection_to_json(const PrunedSelection& selection, double ratio,
                       const std::optional<SignificanceScores>& significance) {
    Json doc;
    doc["n_original"] = selection.n_original;
    doc["strategy"] = std::string(to_string(selection.method));
    doc["ratio"] = ratio;
    doc["kept"] = selection.kept;
    if (selection.rows_kept) {
        doc["rows_kept"] = *selection.rows_kept;
    }
    if (significance) {
        doc["chosen_axis"] = std::string(to_string(significance->chosen_axis));
        doc["var1"] = significance->var1;
        doc["var2"] = significance->var2;
    } else {
        doc["chosen_axis"] = "none";
        doc["var1"] = nullptr;
        doc["var2"] = nullptr;
    }
    return doc;
}

Json concentration_to_json(const ConcentrationReport& report) {
    return Json{{"mass_threshold", report.mass_threshold},
                {"token_fraction", report.token_fraction},
                {"tokens_needed", report.tokens_needed},
                {"token_count", report.token_count},
                {"gini", report.gini}};
}

Json layer_reports_to_json(std::span<const LayerReport> reports) {
    Json list = Json::array();
    for (const auto& entry : reports) {
        Json item;
        item["path"] = entry.path.string();
        if (entry.report) {
            item["report"] = concentration_to_json(*entry.report);
        } else {
            item["error"] = entry.error.value_or("unknown failure");
        }
        list.push_back(std::move(item));
    }
    return list;
}

Json token_budget_to_json(const TokenBudgetReport& report) {
    return Json{{"visual_tokens", report.visual_tokens},
                {"textual_tokens", report.textual_tokens},
                {"visual_fraction", report.visual_fraction}};
}

Json cost_to_json(const CostEstimate& estimate) {
    return Json{{"tokens_before", estimate.tokens_before},
                {"tokens_after", estimate.tokens_after},
                {"prefill_speedup", estimate.prefill_speedup},
                {"decode_speedup", estimate.decode_speedup},
                {"model", std::string(kCostModelName)}};
}

std::string dump_json(const Json& document) {
    return document.dump(2) + "\n";
}

std::string format_layer_table(std::span<const LayerReport> reports) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"path", "threshold", "tokens", "token_fraction", "gini"});
    for (const auto& entry : reports) {
        if (entry.report) {
            const auto& r = *entry.report;
            rows.push_back({entry.path.string(), fixed(r.mass_threshold, 2),
                            std::to_string(r.tokens_needed) + "/" + std::to_string(r.token_count),
                            fixed(r.token_fraction, 4), fixed(r.gini, 4)});
        } else {
            rows.push_back({entry.path.string(), "ERROR", "-", "-", "-"});
        }
    }
    std::string table = align(rows);
    for (const auto& entry : reports) {
        if (entry.error) {
            table += "error: " + *entry.error + "\n";
        }
    }
    return table;
}

std::string format_token_budget(const TokenBudgetReport& report) {
    return align({{"visual_tokens", "textual_tokens", "visual_fraction"},
                  {std::to_string(report.visual_tokens), std::to_string(report.textual_tokens),
                   fixed(report.visual_fraction, 4)}});
}

std::string cost_model_caveat() {
    std::ostringstream out;
    out << "note: " << kCostModelName << " model; attention work only, an upper bound on real speedups"
        << " (measured end-to-end maxima are about " << fixed(kReferenceMeasuredTtftSpeedup, 2) << "x TTFT and "
        << fixed(kReferenceMeasuredTpotSpeedup, 2) << "x TPOT)\n";
    return out.str();
}

std::string format_cost_report(const CostEstimate& estimate, double ratio) {
    std::string text = align({{"ratio", "tokens_before", "tokens_after", "prefill_speedup", "decode_speedup"},
                              {fixed(ratio, 4), std::to_string(estimate.tokens_before),
                               std::to_string(estimate.tokens_after), fixed(estimate.prefill_speedup, 2) + "x",
                               fixed(estimate.decode_speedup, 2) + "x"}});
    return text + cost_model_caveat();
}

std::string format_sweep_table(std::span<const SweepRow> rows) {
    std::vector<std::vector<std::string>> table;
    table.push_back({"ratio", "kept", "rows", "prefill_speedup", "decode_speedup"});
    for (const auto& row : rows) {
        table.push_back({fixed(row.ratio, 4), std::to_string(row.kept),
                         row.rows_kept ? std::to_string(*row.rows_kept) : "-",
                         fixed(row.cost.prefill_speedup, 2) + "x", fixed(row.cost.decode_speedup, 2) + "x"});
    }
    return align(table) + cost_model_caveat();
}

}  // namespace vtprune
