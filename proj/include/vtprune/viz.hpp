// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vtprune/pruning.hpp"

namespace vtprune {

/// Square 8-bit grayscale image, row-major.
struct GridImage {
    std::size_t side = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(std::size_t row, std::size_t col) const {
        return pixels[row * side + col];
    }
};

/// Min-max normalized to 0..255 (rounded). Constant input gives 128 everywhere.
GridImage heatmap(std::span<const double> scores, std::size_t side);
GridImage heatmap(const SignificanceScores& scores, std::size_t side);

/// Kept tokens at 255, dropped at 0.
GridImage selection_mask(const PrunedSelection& selection, std::size_t side);

/// Binary PGM (P5, maxval 255), each pixel blown up to `scale` x `scale`.
std::string encode_pgm(const GridImage& image, std::size_t scale = 1);
void write_pgm(const std::filesystem::path& path, const GridImage& image, std::size_t scale = 1);

}  // namespace vtprune
