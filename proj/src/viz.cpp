// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/viz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "vtprune/error.hpp"

namespace vtprune {

namespace {

void require_side(std::size_t tokens, std::size_t side) {
    if (side == 0 || side * side != tokens) {
        throw Error(ErrorKind::Grid,
                    "side " + std::to_string(side) + " does not fit " + std::to_string(tokens) + " tokens");
    }
}

}  // namespace

GridImage heatmap(std::span<const double> scores, std::size_t side) {
    require_side(scores.size(), side);
    auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    double min = *lo;
    double range = *hi - *lo;

    GridImage image;
    image.side = side;
    image.pixels.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(range > 0.0)) {
            image.pixels[i] = 128;
            continue;
        }
        double level = std::round((scores[i] - min) / range * 255.0);
        image.pixels[i] = static_cast<std::uint8_t>(std::clamp(level, 0.0, 255.0));
    }
    return image;
}

GridImage heatmap(const SignificanceScores& scores, std::size_t side) {
    return heatmap(std::span<const double>(scores.scores), side);
}

GridImage selection_mask(const PrunedSelection& selection, std::size_t side) {
    require_side(selection.n_original, side);
    GridImage image;
    image.side = side;
    image.pixels.assign(selection.n_original, 0);
    for (std::size_t index : selection.kept) {
        if (index >= selection.n_original) {
            throw Error(ErrorKind::Validation, "kept index " + std::to_string(index) + " out of range");
        }
        image.pixels[index] = 255;
    }
    return image;
}

std::string encode_pgm(const GridImage& image, std::size_t scale) {
    if (scale == 0) {
        throw Error(ErrorKind::Validation, "PGM scale must be at least 1");
    }
    const std::size_t out_side = image.side * scale;
    std::string out = "P5\n" + std::to_string(out_side) + " " + std::to_string(out_side) + "\n255\n";
    out.reserve(out.size() + out_side * out_side);
    for (std::size_t r = 0; r < out_side; ++r) {
        for (std::size_t c = 0; c < out_side; ++c) {
            out.push_back(static_cast<char>(image.at(r / scale, c / scale)));
        }
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const GridImage& image, std::size_t scale) {
    std::string bytes = encode_pgm(image, scale);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
    }
}

}  // namespace vtprune
