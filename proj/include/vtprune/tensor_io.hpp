// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vtprune {

/// Dense float32 tensor as stored on disk: row-major values plus a shape.
///
/// The on-disk container is a restricted NPY file: version 1.0/2.0/3.0
/// header, dtype `<f4`, `fortran_order: False`. Anything else is rejected.
struct TensorFile {
    std::vector<std::size_t> shape;
    std::vector<float> values;

    std::size_t element_count() const;
};

/// Serializes a tensor to NPY bytes. Shape product must equal values.size().
std::string encode_npy(std::span<const std::size_t> shape, std::span<const float> values);

/// Parses NPY bytes. Throws Error{Format} on anything outside the supported subset.
TensorFile decode_npy(std::string_view bytes);

TensorFile read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, std::span<const std::size_t> shape, std::span<const float> values);

enum class ClsToken { None, First };

/// Multi-head attention of one encoder layer, laid out (head, query, key).
///
/// Construction validates the shape and that every weight is finite and
/// non-negative; an instance never holds data violating either.
class AttentionMaps {
public:
    AttentionMaps(std::size_t heads, std::size_t tokens, std::vector<float> values);

    std::size_t heads() const noexcept {
        return m_heads;
    }
    std::size_t tokens() const noexcept {
        return m_tokens;
    }
    std::span<const float> values() const noexcept {
        return m_values;
    }

    float at(std::size_t head, std::size_t query, std::size_t key) const {
        return m_values[(head * m_tokens + query) * m_tokens + key];
    }

    /// Same maps with every weight multiplied by `factor` (factor >= 0).
    AttentionMaps scaled(float factor) const;

private:
    std::size_t m_heads;
    std::size_t m_tokens;
    std::vector<float> m_values;
};

struct LoadOptions {
    ClsToken cls_token = ClsToken::None;
};

/// Builds AttentionMaps from a rank-3 tensor, stripping the class token's
/// row and column first when `cls_token == First`.
AttentionMaps attention_from_tensor(const TensorFile& tensor, const LoadOptions& options = {});

AttentionMaps load_attention(const std::filesystem::path& path, const LoadOptions& options = {});

void save_attention(const std::filesystem::path& path, const AttentionMaps& maps);

/// First (head, query) row whose sum is off by more than `tolerance` from 1.
struct StochasticViolation {
    std::size_t head;
    std::size_t query;
    double row_sum;
};

std::optional<StochasticViolation> find_row_stochastic_violation(const AttentionMaps& maps,
                                                                 double tolerance = 1e-4);

/// Writes a rank-1 float32 tensor. Values are narrowed to float32 and must be finite.
void save_vector(std::span<const double> values, const std::filesystem::path& path);
void save_vector(std::span<const float> values, const std::filesystem::path& path);

/// Reads a rank-1 tensor written by save_vector.
std::vector<float> load_vector(const std::filesystem::path& path);

}  // namespace vtprune
