// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "vtprune/pruning.hpp"
#include "vtprune/tensor_io.hpp"

namespace vtprune::cli {

enum class Command { Prune, Analyze, Viz, Estimate, Sweep };

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitIo = 3;

/// Retention fractions of the standard sweep, smallest first.
inline constexpr double kSweepRatios[] = {0.002, 0.027, 0.0625, 0.11, 0.17, 0.25, 0.5, 0.75, 1.0};

/// Everything one invocation needs, after flag parsing.
struct RunManifest {
    Command command = Command::Prune;
    std::vector<std::filesystem::path> attn_paths;
    PruneConfig config;
    bool ratio_given = false;
    ClsToken cls_token = ClsToken::None;
    std::optional<std::filesystem::path> out;
    std::optional<std::filesystem::path> mask_out;
    std::optional<std::filesystem::path> scores_out;
    double mass_threshold = 0.8;
    std::optional<std::size_t> visual_tokens;
    std::optional<std::size_t> textual_tokens;
    std::optional<std::size_t> side;
    std::size_t scale = 1;
    bool check_stochastic = false;
};

/// Accepts "0.25" or "25%". Returns nullopt unless the value lies in (0, 1].
std::optional<double> parse_ratio(std::string_view text);

/// File name used for one sweep step, e.g. "selection_r0.0625.json".
std::string sweep_file_name(double ratio);

int cmd_prune(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_analyze(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_viz(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_estimate(const RunManifest& manifest, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunManifest& manifest, std::ostream& out, std::ostream& err);

/// Parses argv (program name first) and dispatches. Every failure writes
/// exactly one line to `err`; success writes nothing there.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace vtprune::cli
