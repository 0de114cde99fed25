// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "vtprune/analysis.hpp"
#include "vtprune/cost_model.hpp"
#include "vtprune/error.hpp"
#include "vtprune/report.hpp"
#include "vtprune/viz.hpp"

namespace vtprune::cli {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int exit_code_for(ErrorKind kind) {
    return kind == ErrorKind::Io ? kExitIo : kExitData;
}

std::string one_line(std::string text) {
    std::replace(text.begin(), text.end(), '\n', ' ');
    while (!text.empty() && text.back() == ' ') {
        text.pop_back();
    }
    return text;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    }
    file.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!file) {
        throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
    }
}

LoadOptions load_options(const RunManifest& manifest) {
    return LoadOptions{manifest.cls_token};
}

const std::filesystem::path& single_attn(const RunManifest& manifest) {
    if (manifest.attn_paths.size() != 1) {
        throw UsageError("exactly one --attn file is required");
    }
    return manifest.attn_paths.front();
}

AttentionMaps load_for(const RunManifest& manifest, std::ostream& out) {
    AttentionMaps maps = load_attention(single_attn(manifest), load_options(manifest));
    if (manifest.check_stochastic) {
        if (auto bad = find_row_stochastic_violation(maps)) {
            out << "warning: row (" << bad->head << ", " << bad->query << ") sums to " << bad->row_sum
                << ", not 1 within 1e-4\n";
        }
    }
    return maps;
}

// Runs a command body, mapping every failure to an exit code and a single
// diagnostic line.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const UsageError& e) {
        err << "usage error: " << one_line(e.what()) << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << one_line(e.what()) << '\n';
        return exit_code_for(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << one_line(e.what()) << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "internal error: " << one_line(e.what()) << '\n';
        return kExitData;
    }
}

}  // namespace

std::optional<double> parse_ratio(std::string_view text) {
    std::string body(text);
    bool percent = false;
    if (!body.empty() && body.back() == '%') {
        percent = true;
        body.pop_back();
    }
    if (body.empty() || std::isspace(static_cast<unsigned char>(body.front()))) {
        return std::nullopt;
    }
    errno = 0;
    char* end = nullptr;
    double value = std::strtod(body.c_str(), &end);
    if (errno != 0 || end != body.c_str() + body.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    if (percent) {
        value /= 100.0;
    }
    if (!(value > 0.0 && value <= 1.0)) {
        return std::nullopt;
    }
    return value;
}

std::string sweep_file_name(double ratio) {
    std::ostringstream name;
    name << "selection_r" << ratio << ".json";
    return name.str();
}

int cmd_prune(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!manifest.ratio_given) {
            throw UsageError("--ratio is required");
        }
        if (!manifest.out) {
            throw UsageError("--out is required");
        }
        AttentionMaps maps = load_for(manifest, out);
        PruneResult result = prune(maps, manifest.config);
        if (manifest.scores_out) {
            if (!result.significance) {
                throw UsageError("--scores-out is unavailable in pool4 mode");
            }
            save_vector(std::span<const double>(result.significance->scores), *manifest.scores_out);
        }
        write_text(*manifest.out,
                   dump_json(selection_to_json(result.selection, manifest.config.ratio, result.significance)));
        return kExitOk;
    });
}

int cmd_sweep(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!manifest.out) {
            throw UsageError("--out DIR is required");
        }
        AttentionMaps maps = load_for(manifest, out);
        const std::size_t textual = manifest.textual_tokens.value_or(0);

        // All steps are computed before anything is written.
        std::vector<std::pair<std::string, std::string>> files;
        std::vector<SweepRow> rows;
        Json summary = Json::array();
        for (double ratio : kSweepRatios) {
            PruneConfig config = manifest.config;
            config.ratio = ratio;
            PruneResult result = prune(maps, config);
            SweepRow row;
            row.ratio = ratio;
            row.kept = result.selection.kept.size();
            if (result.selection.rows_kept) {
                row.rows_kept = result.selection.rows_kept->size();
            }
            row.cost = estimate_for_kept(maps.tokens(), textual, row.kept);
            std::string name = sweep_file_name(ratio);
            files.emplace_back(name, dump_json(selection_to_json(result.selection, ratio, result.significance)));
            Json item{{"ratio", ratio}, {"kept", row.kept}, {"file", name}, {"cost", cost_to_json(row.cost)}};
            if (row.rows_kept) {
                item["rows_kept"] = *row.rows_kept;
            }
            summary.push_back(std::move(item));
            rows.push_back(row);
        }

        std::filesystem::create_directories(*manifest.out);
        for (const auto& [name, text] : files) {
            write_text(*manifest.out / name, text);
        }
        write_text(*manifest.out / "summary.json", dump_json(summary));
        out << format_sweep_table(rows);
        return kExitOk;
    });
}

int cmd_analyze(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!(manifest.mass_threshold > 0.0 && manifest.mass_threshold <= 1.0)) {
            throw UsageError("--mass-threshold must lie in (0, 1]");
        }
        bool budget = manifest.visual_tokens || manifest.textual_tokens;
        if (manifest.attn_paths.empty() && !budget) {
            throw UsageError("give --attn files, token counts, or both");
        }
        Json doc = Json::object();
        std::vector<LayerReport> reports;
        if (!manifest.attn_paths.empty()) {
            reports = layer_sweep(manifest.attn_paths, manifest.mass_threshold, load_options(manifest));
            out << format_layer_table(reports);
            doc["layers"] = layer_reports_to_json(reports);
        }
        if (budget) {
            TokenBudgetReport report =
                token_budget(manifest.visual_tokens.value_or(0), manifest.textual_tokens.value_or(0));
            out << format_token_budget(report);
            doc["token_budget"] = token_budget_to_json(report);
        }
        if (manifest.out) {
            write_text(*manifest.out, dump_json(doc));
        }

        auto failed = std::count_if(reports.begin(), reports.end(), [](const auto& r) { return r.error.has_value(); });
        if (failed > 0) {
            auto first = std::find_if(reports.begin(), reports.end(), [](const auto& r) { return r.error.has_value(); });
            err << failed << " of " << reports.size() << " inputs failed; first: " << one_line(*first->error) << '\n';
            bool io = first->error->rfind("I/O", 0) == 0;
            return io ? kExitIo : kExitData;
        }
        return kExitOk;
    });
}

int cmd_viz(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!manifest.out) {
            throw UsageError("--out is required");
        }
        if (manifest.scale == 0) {
            throw UsageError("--scale must be at least 1");
        }
        if (manifest.mask_out && !manifest.ratio_given &&
            manifest.config.significance_mode != SignificanceMode::Pool4) {
            throw UsageError("--mask-out needs --ratio");
        }
        AttentionMaps maps = load_for(manifest, out);
        std::size_t side = 0;
        if (manifest.side) {
            side = *manifest.side;
        } else if (auto inferred = exact_grid_side(maps.tokens())) {
            side = *inferred;
        } else {
            throw Error(ErrorKind::Grid, "token count " + std::to_string(maps.tokens()) +
                                             " is not a perfect square; pass --side");
        }

        SignificanceMode heat_mode = manifest.config.significance_mode == SignificanceMode::AntiVariance
                                         ? SignificanceMode::AntiVariance
                                         : SignificanceMode::Variance;
        GridImage heat = heatmap(score_tokens(maps, heat_mode), side);
        std::optional<GridImage> mask;
        if (manifest.mask_out) {
            PruneConfig config = manifest.config;
            if (!manifest.ratio_given) {
                config.ratio = 1.0;
            }
            mask = selection_mask(prune(maps, config).selection, side);
        }
        write_pgm(*manifest.out, heat, manifest.scale);
        if (mask) {
            write_pgm(*manifest.mask_out, *mask, manifest.scale);
        }
        return kExitOk;
    });
}

int cmd_estimate(const RunManifest& manifest, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!manifest.visual_tokens) {
            throw UsageError("--visual-tokens is required");
        }
        if (*manifest.visual_tokens == 0) {
            throw UsageError("--visual-tokens must be at least 1");
        }
        if (!manifest.ratio_given) {
            throw UsageError("--ratio is required");
        }
        CostEstimate est = estimate(*manifest.visual_tokens, manifest.textual_tokens.value_or(0), manifest.config.ratio);
        out << format_cost_report(est, manifest.config.ratio);
        if (manifest.out) {
            write_text(*manifest.out, dump_json(cost_to_json(est)));
        }
        return kExitOk;
    });
}

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Attention-guided visual token pruning toolkit", "vtprune"};
    app.require_subcommand(1);

    RunManifest manifest;
    std::vector<std::string> attn;
    std::string ratio;
    std::string strategy = "rank";
    std::string mode = "variance";
    std::string cls = "none";
    bool no_reorder = false;
    std::string out_path;
    std::string mask_out;
    std::string scores_out;
    std::size_t visual = 0;
    std::size_t textual = 0;
    std::size_t side = 0;

    auto add_attn = [&](CLI::App* sub, bool many) {
        auto* opt = sub->add_option("--attn", attn, many ? "Attention tensor files (H, N, N)" : "Attention tensor file");
        if (!many) {
            opt->expected(1);
        }
        sub->add_option("--cls-token", cls, "Leading class token in the file: none or first");
    };
    auto add_selection = [&](CLI::App* sub) {
        sub->add_option("--strategy", strategy, "Selection strategy: rank or row");
        sub->add_option("--mode", mode, "Scoring: variance, anti-variance or pool4");
        sub->add_flag("--no-reorder", no_reorder, "Keep selection order instead of ascending positions");
        sub->add_flag("--check-stochastic", manifest.check_stochastic, "Warn when attention rows do not sum to 1");
    };

    CLI::App* prune_cmd = app.add_subcommand("prune", "Score tokens and write the kept index set as JSON");
    add_attn(prune_cmd, false);
    add_selection(prune_cmd);
    prune_cmd->add_option("--ratio", ratio, "Retention ratio in (0, 1], or a percentage like 25%");
    prune_cmd->add_option("--out", out_path, "Selection JSON path");
    prune_cmd->add_option("--scores-out", scores_out, "Also write the significance vector as .npy");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Prune at the nine standard retention ratios");
    add_attn(sweep_cmd, false);
    add_selection(sweep_cmd);
    sweep_cmd->add_option("--out", out_path, "Output directory");
    sweep_cmd->add_option("--textual-tokens", textual, "Text tokens for the cost columns");

    CLI::App* analyze_cmd = app.add_subcommand("analyze", "Attention concentration and token budget reports");
    add_attn(analyze_cmd, true);
    analyze_cmd->add_option("--mass-threshold", manifest.mass_threshold, "Attention mass to cover");
    analyze_cmd->add_option("--visual-tokens", visual, "Visual token count");
    analyze_cmd->add_option("--textual-tokens", textual, "Textual token count");
    analyze_cmd->add_option("--out", out_path, "Report JSON path");

    CLI::App* viz_cmd = app.add_subcommand("viz", "Write significance heatmap and selection mask as PGM");
    add_attn(viz_cmd, false);
    add_selection(viz_cmd);
    viz_cmd->add_option("--ratio", ratio, "Retention ratio for the mask");
    viz_cmd->add_option("--side", side, "Grid side (defaults to sqrt(N))");
    viz_cmd->add_option("--scale", manifest.scale, "Nearest-neighbour upscale factor");
    viz_cmd->add_option("--out", out_path, "Heatmap PGM path");
    viz_cmd->add_option("--mask-out", mask_out, "Selection mask PGM path");

    CLI::App* estimate_cmd = app.add_subcommand("estimate", "Analytical prefill/decode speedup upper bound");
    estimate_cmd->add_option("--visual-tokens", visual, "Visual token count");
    estimate_cmd->add_option("--textual-tokens", textual, "Textual token count");
    estimate_cmd->add_option("--ratio", ratio, "Retention ratio in (0, 1]");
    estimate_cmd->add_option("--out", out_path, "Estimate JSON path");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << one_line(e.what()) << '\n';
        return kExitUsage;
    }

    auto usage = [&](const std::string& message) {
        err << "usage error: " << message << '\n';
        return kExitUsage;
    };

    CLI::App* chosen = app.get_subcommands().front();
    auto given = [&](const std::string& flag) {
        const CLI::Option* opt = chosen->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    for (const auto& path : attn) {
        manifest.attn_paths.emplace_back(path);
    }
    if (!ratio.empty()) {
        auto parsed = parse_ratio(ratio);
        if (!parsed) {
            return usage("--ratio '" + ratio + "' must be in (0, 1] or a percentage in (0%, 100%]");
        }
        manifest.config.ratio = *parsed;
        manifest.ratio_given = true;
    } else if (given("--ratio")) {
        return usage("--ratio is empty");
    }
    auto parsed_strategy = parse_strategy(strategy);
    if (!parsed_strategy) {
        return usage("--strategy must be rank or row, got '" + strategy + "'");
    }
    manifest.config.strategy = *parsed_strategy;
    auto parsed_mode = parse_significance_mode(mode);
    if (!parsed_mode) {
        return usage("--mode must be variance, anti-variance or pool4, got '" + mode + "'");
    }
    manifest.config.significance_mode = *parsed_mode;
    manifest.config.reorder = !no_reorder;
    if (cls == "none") {
        manifest.cls_token = ClsToken::None;
    } else if (cls == "first") {
        manifest.cls_token = ClsToken::First;
    } else {
        return usage("--cls-token must be none or first, got '" + cls + "'");
    }
    if (!out_path.empty()) {
        manifest.out = out_path;
    }
    if (!mask_out.empty()) {
        manifest.mask_out = mask_out;
    }
    if (!scores_out.empty()) {
        manifest.scores_out = scores_out;
    }
    if (given("--visual-tokens")) {
        manifest.visual_tokens = visual;
    }
    if (given("--textual-tokens")) {
        manifest.textual_tokens = textual;
    }
    if (given("--side")) {
        manifest.side = side;
    }

    const std::string name = chosen->get_name();
    if (name == "prune") {
        manifest.command = Command::Prune;
        return cmd_prune(manifest, out, err);
    }
    if (name == "sweep") {
        manifest.command = Command::Sweep;
        return cmd_sweep(manifest, out, err);
    }
    if (name == "analyze") {
        manifest.command = Command::Analyze;
        return cmd_analyze(manifest, out, err);
    }
    if (name == "viz") {
        manifest.command = Command::Viz;
        return cmd_viz(manifest, out, err);
    }
    manifest.command = Command::Estimate;
    return cmd_estimate(manifest, out, err);
}

}  // namespace vtprune::cli
