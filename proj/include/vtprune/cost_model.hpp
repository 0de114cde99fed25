// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

namespace vtprune {

/// Attention-work estimate for a sequence before and after visual pruning.
///
/// Prefill work is taken as quadratic in sequence length and per-token
/// decode work as linear, so the speedups are upper bounds: projector,
/// sampling, MLP and memory-bound decode costs are not modelled.
struct CostEstimate {
    std::size_t tokens_before = 0;
    std::size_t tokens_after = 0;
    double prefill_ratio = 1.0;
    double decode_ratio = 1.0;
    double prefill_speedup = 1.0;
    double decode_speedup = 1.0;
};

inline constexpr std::string_view kCostModelName = "quadratic-upper-bound";

/// End-to-end speedups measured on real LVLMs top out far below the model:
/// about 2.52x time-to-first-token and 1.24x time-per-output-token at 25%
/// retention on a 13B model. Used only to caption reports.
inline constexpr double kReferenceMeasuredTtftSpeedup = 2.52;
inline constexpr double kReferenceMeasuredTpotSpeedup = 1.24;

/// Visual tokens are reduced with keep_count(visual, ratio); textual tokens are untouched.
CostEstimate estimate(std::size_t visual, std::size_t textual, double ratio);

/// Same model for an explicit surviving visual count (e.g. whole rows kept).
CostEstimate estimate_for_kept(std::size_t visual, std::size_t textual, std::size_t kept_visual);

}  // namespace vtprune
