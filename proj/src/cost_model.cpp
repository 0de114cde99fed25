// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/cost_model.hpp"

#include <string>

#include "vtprune/error.hpp"
#include "vtprune/pruning.hpp"

namespace vtprune {

CostEstimate estimate(std::size_t visual, std::size_t textual, double ratio) {
    if (visual == 0) {
        throw Error(ErrorKind::Validation, "cost estimate needs at least one visual token");
    }
    return estimate_for_kept(visual, textual, keep_count(visual, ratio));
}

CostEstimate estimate_for_kept(std::size_t visual, std::size_t textual, std::size_t kept_visual) {
    if (visual == 0 || kept_visual == 0 || kept_visual > visual) {
        throw Error(ErrorKind::Validation, "kept visual count " + std::to_string(kept_visual) +
                                               " must lie in [1, " + std::to_string(visual) + "]");
    }
    CostEstimate est;
    est.tokens_before = visual + textual;
    est.tokens_after = kept_visual + textual;
    double shrink = static_cast<double>(est.tokens_after) / static_cast<double>(est.tokens_before);
    est.decode_ratio = shrink;
    est.prefill_ratio = shrink * shrink;
    est.decode_speedup = 1.0 / est.decode_ratio;
    est.prefill_speedup = 1.0 / est.prefill_ratio;
    return est;
}

}  // namespace vtprune
