// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "vtprune/tensor_io.hpp"

namespace vtprune {

/// Dense N x N matrix of doubles, row-major.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t side) : m_side(side), m_values(side * side, 0.0) {}
    SquareMatrix(std::size_t side, std::vector<double> values);

    std::size_t side() const noexcept {
        return m_side;
    }
    double operator()(std::size_t row, std::size_t col) const {
        return m_values[row * m_side + col];
    }
    double& operator()(std::size_t row, std::size_t col) {
        return m_values[row * m_side + col];
    }
    std::span<const double> values() const noexcept {
        return m_values;
    }

    SquareMatrix transposed() const;

private:
    std::size_t m_side = 0;
    std::vector<double> m_values;
};

/// Which mean vector supplied the token scores.
enum class Axis {
    Columns,  // s1: mean attention each key receives
    Rows,     // s2: mean attention each query emits
};

std::string_view to_string(Axis axis);

struct AxisMeans {
    std::vector<double> column_means;  // s1[j] = mean_i avg(i, j)
    std::vector<double> row_means;     // s2[i] = mean_j avg(i, j)
};

struct SignificanceScores {
    std::vector<double> scores;  // == s1 or s2, per chosen_axis
    std::vector<double> s1;
    std::vector<double> s2;
    double var1 = 0.0;
    double var2 = 0.0;
    Axis chosen_axis = Axis::Rows;

    std::size_t size() const noexcept {
        return scores.size();
    }
};

/// Elementwise mean over heads, accumulated in double.
SquareMatrix average_heads(const AttentionMaps& maps);

AxisMeans axis_means(const SquareMatrix& avg);

/// Variance with denominator N. Zero for an empty or single-element input.
double population_variance(std::span<const double> values);

/// Head-average, take both axis means, keep the one with strictly larger
/// variance. Equal variances select the row means.
SignificanceScores compute_significance(const AttentionMaps& maps);

/// Ablation: keep the axis with the smaller variance. Equal variances select
/// the column means, mirroring the main tie rule.
SignificanceScores compute_significance_ablated(const AttentionMaps& maps);

/// Same selection rules applied to an already head-averaged matrix.
SignificanceScores significance_from_average(const SquareMatrix& avg, bool prefer_low_variance = false);

}  // namespace vtprune
