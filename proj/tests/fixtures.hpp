// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only generators and brute-force oracles. Nothing here calls into the
// library's math; the oracles recompute everything with plain loops.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "vtprune/tensor_io.hpp"

namespace vtprune::testing {

inline AttentionMaps random_maps(std::mt19937_64& rng, std::size_t heads, std::size_t tokens) {
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    std::vector<float> values(heads * tokens * tokens);
    for (float& v : values) {
        v = unit(rng);
    }
    return AttentionMaps(heads, tokens, std::move(values));
}

/// Every query row normalized to sum to one, like post-softmax attention.
inline AttentionMaps random_stochastic_maps(std::mt19937_64& rng, std::size_t heads, std::size_t tokens) {
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    std::vector<float> values(heads * tokens * tokens);
    for (std::size_t row = 0; row < heads * tokens; ++row) {
        std::vector<double> w(tokens);
        double sum = 0.0;
        for (double& x : w) {
            x = unit(rng);
            sum += x;
        }
        for (std::size_t k = 0; k < tokens; ++k) {
            values[row * tokens + k] = static_cast<float>(w[k] / sum);
        }
    }
    return AttentionMaps(heads, tokens, std::move(values));
}

/// Every query row equal to `row` on all heads.
inline AttentionMaps repeated_row_maps(std::size_t heads, const std::vector<float>& row) {
    const std::size_t n = row.size();
    std::vector<float> values;
    values.reserve(heads * n * n);
    for (std::size_t i = 0; i < heads * n; ++i) {
        values.insert(values.end(), row.begin(), row.end());
    }
    return AttentionMaps(heads, n, std::move(values));
}

inline AttentionMaps uniform_maps(std::size_t heads, std::size_t tokens) {
    return repeated_row_maps(heads, std::vector<float>(tokens, 1.0f / static_cast<float>(tokens)));
}

/// One key column receives `dominant_mass` of every query's attention, the
/// rest is spread evenly over the other keys.
inline AttentionMaps collapsed_maps(std::size_t heads, std::size_t tokens, std::size_t key, float dominant_mass) {
    std::vector<float> row(tokens, (1.0f - dominant_mass) / static_cast<float>(tokens - 1));
    row[key] = dominant_mass;
    return repeated_row_maps(heads, row);
}

/// Deterministic (16, 576, 576) row-stochastic tensor used by the end-to-end checks.
inline AttentionMaps llava_sized_maps(std::uint64_t seed = 20240601) {
    std::mt19937_64 rng(seed);
    return random_stochastic_maps(rng, 16, 576);
}

struct OracleSignificance {
    std::vector<long double> s1;
    std::vector<long double> s2;
    long double var1 = 0;
    long double var2 = 0;
    bool columns_chosen = false;
};

inline long double oracle_variance(const std::vector<long double>& v) {
    long double mean = 0;
    for (long double x : v) {
        mean += x;
    }
    mean /= static_cast<long double>(v.size());
    long double acc = 0;
    for (long double x : v) {
        acc += (x - mean) * (x - mean);
    }
    return acc / static_cast<long double>(v.size());
}

/// Nested loops straight from the definitions, in extended precision.
inline OracleSignificance oracle_significance(const AttentionMaps& maps) {
    const std::size_t h = maps.heads();
    const std::size_t n = maps.tokens();
    OracleSignificance out;
    out.s1.assign(n, 0);
    out.s2.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            long double avg = 0;
            for (std::size_t k = 0; k < h; ++k) {
                avg += maps.at(k, i, j);
            }
            avg /= static_cast<long double>(h);
            out.s1[j] += avg / static_cast<long double>(n);
            out.s2[i] += avg / static_cast<long double>(n);
        }
    }
    out.var1 = oracle_variance(out.s1);
    out.var2 = oracle_variance(out.s2);
    out.columns_chosen = out.var1 > out.var2;
    return out;
}

/// Full stable sort by descending score: the reference top-k.
inline std::vector<std::size_t> oracle_rank(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    order.resize(k);
    return order;
}

/// floor(total * num / den) with a minimum of one, in exact integer arithmetic.
inline std::size_t oracle_keep_count(std::size_t total, std::uint64_t num, std::uint64_t den) {
    std::uint64_t k = static_cast<std::uint64_t>(total) * num / den;
    return static_cast<std::size_t>(std::max<std::uint64_t>(1, k));
}

inline bool close_rel(long double a, long double b, long double rel, long double abs_floor = 1e-12L) {
    long double diff = std::fabs(a - b);
    return diff <= abs_floor || diff <= rel * std::max(std::fabs(a), std::fabs(b));
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        m_path = std::filesystem::temp_directory_path() / ("vtprune_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(m_path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const {
        return m_path;
    }
    std::filesystem::path operator/(const std::string& name) const {
        return m_path / name;
    }

private:
    std::filesystem::path m_path;
};

}  // namespace vtprune::testing
