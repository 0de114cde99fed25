// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/significance.hpp"

#include <string>

#include "vtprune/error.hpp"

namespace vtprune {

SquareMatrix::SquareMatrix(std::size_t side, std::vector<double> values) : m_side(side), m_values(std::move(values)) {
    if (m_values.size() != side * side) {
        throw Error(ErrorKind::Shape, "square matrix of side " + std::to_string(side) + " needs " +
                                          std::to_string(side * side) + " values, got " +
                                          std::to_string(m_values.size()));
    }
}

SquareMatrix SquareMatrix::transposed() const {
    SquareMatrix out(m_side);
    for (std::size_t i = 0; i < m_side; ++i) {
        for (std::size_t j = 0; j < m_side; ++j) {
            out(j, i) = (*this)(i, j);
        }
    }
    return out;
}

std::string_view to_string(Axis axis) {
    return axis == Axis::Columns ? "columns" : "rows";
}

SquareMatrix average_heads(const AttentionMaps& maps) {
    const std::size_t n = maps.tokens();
    const std::size_t plane = n * n;
    std::span<const float> values = maps.values();

    // Heads are summed in index order so the result does not depend on scheduling.
    std::vector<double> sum(plane, 0.0);
    for (std::size_t h = 0; h < maps.heads(); ++h) {
        const float* head = values.data() + h * plane;
        for (std::size_t i = 0; i < plane; ++i) {
            sum[i] += static_cast<double>(head[i]);
        }
    }
    const double inv_heads = 1.0 / static_cast<double>(maps.heads());
    for (double& v : sum) {
        v *= inv_heads;
    }
    return SquareMatrix(n, std::move(sum));
}

AxisMeans axis_means(const SquareMatrix& avg) {
    const std::size_t n = avg.side();
    AxisMeans means;
    means.column_means.assign(n, 0.0);
    means.row_means.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double v = avg(i, j);
            row_sum += v;
            means.column_means[j] += v;
        }
        means.row_means[i] = row_sum;
    }
    if (n > 0) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            means.column_means[k] *= inv_n;
            means.row_means[k] *= inv_n;
        }
    }
    return means;
}

double population_variance(std::span<const double> values) {
    if (values.empty()) {
        return 0.0;
    }
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) {
        mean += v;
    }
    mean /= n;
    double acc = 0.0;
    for (double v : values) {
        double d = v - mean;
        acc += d * d;
    }
    return acc / n;
}

SignificanceScores significance_from_average(const SquareMatrix& avg, bool prefer_low_variance) {
    AxisMeans means = axis_means(avg);
    SignificanceScores sig;
    sig.var1 = population_variance(means.column_means);
    sig.var2 = population_variance(means.row_means);
    if (prefer_low_variance) {
        sig.chosen_axis = sig.var1 > sig.var2 ? Axis::Rows : Axis::Columns;
    } else {
        sig.chosen_axis = sig.var1 > sig.var2 ? Axis::Columns : Axis::Rows;
    }
    sig.s1 = std::move(means.column_means);
    sig.s2 = std::move(means.row_means);
    sig.scores = sig.chosen_axis == Axis::Columns ? sig.s1 : sig.s2;
    return sig;
}

SignificanceScores compute_significance(const AttentionMaps& maps) {
    return significance_from_average(average_heads(maps), false);
}

SignificanceScores compute_significance_ablated(const AttentionMaps& maps) {
    return significance_from_average(average_heads(maps), true);
}

}  // namespace vtprune
