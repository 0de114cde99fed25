// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

#include "vtprune/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include "vtprune/error.hpp"

namespace vtprune {

namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kAlignment = 64;

std::uint32_t to_little_endian(std::uint32_t word) {
    if constexpr (std::endian::native == std::endian::little) {
        return word;
    } else {
        return ((word & 0xFFu) << 24) | ((word & 0xFF00u) << 8) | ((word >> 8) & 0xFF00u) | (word >> 24);
    }
}

std::size_t checked_product(std::span<const std::size_t> shape) {
    std::size_t count = 1;
    for (std::size_t dim : shape) {
        if (dim != 0 && count > std::numeric_limits<std::size_t>::max() / dim) {
            throw Error(ErrorKind::Format, "shape product overflows");
        }
        count *= dim;
    }
    return count;
}

std::string shape_literal(std::span<const std::size_t> shape) {
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += std::to_string(shape[i]);
    }
    if (shape.size() == 1) {
        out += ",";
    }
    out += ")";
    return out;
}

std::string shape_text(std::span<const std::size_t> shape) {
    return shape_literal(shape);
}

// Minimal reader for the Python dict literal in an NPY header. Only the value
// forms NPY actually emits are understood: quoted strings, booleans, and
// tuples of non-negative integers.
class HeaderParser {
public:
    struct Value {
        std::string text;                // string or boolean literal
        std::vector<std::size_t> tuple;  // only for tuples
        bool is_tuple = false;
    };

    explicit HeaderParser(std::string_view text) : m_text(text) {}

    std::map<std::string, Value> parse() {
        std::map<std::string, Value> entries;
        skip_space();
        expect('{');
        skip_space();
        while (peek() != '}') {
            std::string key = parse_string();
            skip_space();
            expect(':');
            skip_space();
            Value value = parse_value();
            if (!entries.emplace(key, std::move(value)).second) {
                fail("duplicate key '" + key + "'");
            }
            skip_space();
            if (peek() == ',') {
                ++m_pos;
                skip_space();
            } else if (peek() != '}') {
                fail("expected ',' or '}'");
            }
        }
        ++m_pos;
        skip_space();
        if (m_pos != m_text.size()) {
            fail("trailing characters after header dict");
        }
        return entries;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::Format, "NPY header: " + what + " at offset " + std::to_string(m_pos));
    }

    char peek() const {
        if (m_pos >= m_text.size()) {
            fail("unexpected end of header");
        }
        return m_text[m_pos];
    }

    void expect(char c) {
        if (peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++m_pos;
    }

    void skip_space() {
        while (m_pos < m_text.size() && std::isspace(static_cast<unsigned char>(m_text[m_pos]))) {
            ++m_pos;
        }
    }

    std::string parse_string() {
        char quote = peek();
        if (quote != '\'' && quote != '"') {
            fail("expected quoted string");
        }
        ++m_pos;
        std::size_t end = m_text.find(quote, m_pos);
        if (end == std::string_view::npos) {
            fail("unterminated string");
        }
        std::string out(m_text.substr(m_pos, end - m_pos));
        m_pos = end + 1;
        return out;
    }

    std::size_t parse_integer() {
        std::size_t start = m_pos;
        std::size_t value = 0;
        while (m_pos < m_text.size() && std::isdigit(static_cast<unsigned char>(m_text[m_pos]))) {
            std::size_t digit = static_cast<std::size_t>(m_text[m_pos] - '0');
            if (value > (std::numeric_limits<std::size_t>::max() - digit) / 10) {
                fail("dimension too large");
            }
            value = value * 10 + digit;
            ++m_pos;
        }
        // Python 2 era writers emit long literals such as 576L.
        if (m_pos < m_text.size() && m_text[m_pos] == 'L') {
            ++m_pos;
        }
        if (m_pos == start) {
            fail("expected integer");
        }
        return value;
    }

    Value parse_value() {
        Value value;
        char c = peek();
        if (c == '\'' || c == '"') {
            value.text = parse_string();
        } else if (c == '(') {
            value.is_tuple = true;
            ++m_pos;
            skip_space();
            while (peek() != ')') {
                value.tuple.push_back(parse_integer());
                skip_space();
                if (peek() == ',') {
                    ++m_pos;
                    skip_space();
                } else if (peek() != ')') {
                    fail("expected ',' or ')' in shape");
                }
            }
            ++m_pos;
        } else {
            std::size_t start = m_pos;
            while (m_pos < m_text.size() && std::isalpha(static_cast<unsigned char>(m_text[m_pos]))) {
                ++m_pos;
            }
            value.text = std::string(m_text.substr(start, m_pos - start));
            if (value.text != "True" && value.text != "False") {
                fail("unsupported literal '" + value.text + "'");
            }
        }
        return value;
    }

    std::string_view m_text;
    std::size_t m_pos = 0;
};

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
    }
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error(ErrorKind::Io, "failed reading '" + path.string() + "'");
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
        throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
    }
}

void check_weights(std::span<const float> values, std::size_t side) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        float v = values[i];
        if (!std::isfinite(v) || v < 0.0f) {
            std::ostringstream msg;
            msg << "attention weight at (" << i / (side * side) << ", " << (i / side) % side << ", " << i % side
                << ") is " << v << (std::isfinite(v) ? ", must be non-negative" : ", must be finite");
            throw Error(ErrorKind::Value, msg.str());
        }
    }
}

}  // namespace

std::size_t TensorFile::element_count() const {
    return checked_product(shape);
}

std::string encode_npy(std::span<const std::size_t> shape, std::span<const float> values) {
    if (checked_product(shape) != values.size()) {
        throw Error(ErrorKind::Shape,
                    "shape " + shape_text(shape) + " does not match " + std::to_string(values.size()) + " values");
    }

    std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': " + shape_literal(shape) + ", }";

    // Version 1.0 stores the header length in 2 bytes; fall back to 2.0 for huge shapes.
    std::size_t prefix = kMagic.size() + 2 + 2;
    std::size_t unpadded = prefix + dict.size() + 1;
    std::size_t padded = (unpadded + kAlignment - 1) / kAlignment * kAlignment;
    bool v2 = padded - prefix > 0xFFFF;
    if (v2) {
        prefix = kMagic.size() + 2 + 4;
        unpadded = prefix + dict.size() + 1;
        padded = (unpadded + kAlignment - 1) / kAlignment * kAlignment;
    }
    dict.append(padded - unpadded, ' ');
    dict.push_back('\n');

    std::string out;
    out.reserve(padded + values.size() * 4);
    out.append(kMagic);
    out.push_back(static_cast<char>(v2 ? 2 : 1));
    out.push_back('\0');
    std::size_t header_len = dict.size();
    out.push_back(static_cast<char>(header_len & 0xFF));
    out.push_back(static_cast<char>((header_len >> 8) & 0xFF));
    if (v2) {
        out.push_back(static_cast<char>((header_len >> 16) & 0xFF));
        out.push_back(static_cast<char>((header_len >> 24) & 0xFF));
    }
    out.append(dict);

    for (float value : values) {
        std::uint32_t word = to_little_endian(std::bit_cast<std::uint32_t>(value));
        char bytes[4];
        std::memcpy(bytes, &word, 4);
        out.append(bytes, 4);
    }
    return out;
}

TensorFile decode_npy(std::string_view bytes) {
    if (bytes.size() < kMagic.size() + 4 || bytes.substr(0, kMagic.size()) != kMagic) {
        throw Error(ErrorKind::Format, "missing NPY magic string");
    }
    auto byte_at = [&](std::size_t i) { return static_cast<std::uint8_t>(bytes[i]); };
    std::uint8_t major = byte_at(6);
    std::size_t header_len = 0;
    std::size_t header_start = 0;
    if (major == 1) {
        header_len = byte_at(8) | (static_cast<std::size_t>(byte_at(9)) << 8);
        header_start = 10;
    } else if (major == 2 || major == 3) {
        if (bytes.size() < 12) {
            throw Error(ErrorKind::Format, "truncated NPY preamble");
        }
        header_len = byte_at(8) | (static_cast<std::size_t>(byte_at(9)) << 8) |
                     (static_cast<std::size_t>(byte_at(10)) << 16) | (static_cast<std::size_t>(byte_at(11)) << 24);
        header_start = 12;
    } else {
        throw Error(ErrorKind::Format, "unsupported NPY version " + std::to_string(major));
    }
    if (bytes.size() < header_start + header_len) {
        throw Error(ErrorKind::Format, "truncated NPY header");
    }

    auto entries = HeaderParser(bytes.substr(header_start, header_len)).parse();
    auto descr = entries.find("descr");
    auto order = entries.find("fortran_order");
    auto shape = entries.find("shape");
    if (descr == entries.end() || order == entries.end() || shape == entries.end() || entries.size() != 3) {
        throw Error(ErrorKind::Format, "NPY header must hold exactly descr, fortran_order and shape");
    }
    if (descr->second.is_tuple || descr->second.text != "<f4") {
        throw Error(ErrorKind::Format, "unsupported dtype '" + descr->second.text + "', expected '<f4'");
    }
    if (order->second.text != "False") {
        throw Error(ErrorKind::Format, "fortran_order arrays are not supported");
    }
    if (!shape->second.is_tuple) {
        throw Error(ErrorKind::Format, "shape is not a tuple");
    }

    TensorFile tensor;
    tensor.shape = shape->second.tuple;
    std::size_t count = checked_product(tensor.shape);
    std::size_t payload_start = header_start + header_len;
    std::size_t payload_size = bytes.size() - payload_start;
    if (count > std::numeric_limits<std::size_t>::max() / 4 || payload_size != count * 4) {
        throw Error(ErrorKind::Format, "payload holds " + std::to_string(payload_size) + " bytes, shape " +
                                           shape_text(tensor.shape) + " needs " + std::to_string(count * 4));
    }

    tensor.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t word;
        std::memcpy(&word, bytes.data() + payload_start + i * 4, 4);
        tensor.values[i] = std::bit_cast<float>(to_little_endian(word));
    }
    return tensor;
}

TensorFile read_tensor(const std::filesystem::path& path) {
    std::string bytes = read_file(path);
    try {
        return decode_npy(bytes);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.detail());
    }
}

void write_tensor(const std::filesystem::path& path, std::span<const std::size_t> shape, std::span<const float> values) {
    write_file(path, encode_npy(shape, values));
}

AttentionMaps::AttentionMaps(std::size_t heads, std::size_t tokens, std::vector<float> values)
    : m_heads(heads),
      m_tokens(tokens),
      m_values(std::move(values)) {
    if (heads == 0 || tokens == 0) {
        throw Error(ErrorKind::Shape, "attention maps need at least one head and one token");
    }
    if (m_values.size() != heads * tokens * tokens) {
        throw Error(ErrorKind::Shape, "expected " + std::to_string(heads * tokens * tokens) + " weights, got " +
                                          std::to_string(m_values.size()));
    }
    check_weights(m_values, tokens);
}

AttentionMaps AttentionMaps::scaled(float factor) const {
    if (!std::isfinite(factor) || factor < 0.0f) {
        throw Error(ErrorKind::Validation, "scale factor must be finite and non-negative");
    }
    std::vector<float> out(m_values);
    for (float& v : out) {
        v *= factor;
    }
    return AttentionMaps(m_heads, m_tokens, std::move(out));
}

AttentionMaps attention_from_tensor(const TensorFile& tensor, const LoadOptions& options) {
    if (tensor.shape.size() != 3) {
        throw Error(ErrorKind::Shape, "attention tensor must be rank 3 (heads, query, key), got shape " +
                                          shape_text(tensor.shape));
    }
    if (tensor.shape[1] != tensor.shape[2]) {
        throw Error(ErrorKind::Shape, "attention tensor trailing dims differ: " + shape_text(tensor.shape));
    }
    std::size_t heads = tensor.shape[0];
    std::size_t side = tensor.shape[1];

    // Validate the raw file so error indices refer to file coordinates.
    check_weights(tensor.values, side);

    if (options.cls_token == ClsToken::None) {
        return AttentionMaps(heads, side, tensor.values);
    }
    if (side < 2) {
        throw Error(ErrorKind::Shape, "cannot strip class token from " + shape_text(tensor.shape));
    }
    std::size_t tokens = side - 1;
    std::vector<float> stripped;
    stripped.reserve(heads * tokens * tokens);
    for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t q = 1; q < side; ++q) {
            auto row = tensor.values.begin() + static_cast<std::ptrdiff_t>((h * side + q) * side);
            stripped.insert(stripped.end(), row + 1, row + static_cast<std::ptrdiff_t>(side));
        }
    }
    return AttentionMaps(heads, tokens, std::move(stripped));
}

AttentionMaps load_attention(const std::filesystem::path& path, const LoadOptions& options) {
    TensorFile tensor = read_tensor(path);
    try {
        return attention_from_tensor(tensor, options);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.detail());
    }
}

void save_attention(const std::filesystem::path& path, const AttentionMaps& maps) {
    const std::size_t shape[] = {maps.heads(), maps.tokens(), maps.tokens()};
    write_tensor(path, shape, maps.values());
}

std::optional<StochasticViolation> find_row_stochastic_violation(const AttentionMaps& maps, double tolerance) {
    std::size_t n = maps.tokens();
    for (std::size_t h = 0; h < maps.heads(); ++h) {
        for (std::size_t q = 0; q < n; ++q) {
            double sum = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                sum += maps.at(h, q, k);
            }
            if (std::abs(sum - 1.0) > tolerance) {
                return StochasticViolation{h, q, sum};
            }
        }
    }
    return std::nullopt;
}

void save_vector(std::span<const float> values, const std::filesystem::path& path) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorKind::Value, "vector element " + std::to_string(i) + " is not finite");
        }
    }
    const std::size_t shape[] = {values.size()};
    write_tensor(path, shape, values);
}

void save_vector(std::span<const double> values, const std::filesystem::path& path) {
    std::vector<float> narrowed(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(ErrorKind::Value, "vector element " + std::to_string(i) + " is not finite");
        }
        narrowed[i] = static_cast<float>(values[i]);
        if (!std::isfinite(narrowed[i])) {
            throw Error(ErrorKind::Value, "vector element " + std::to_string(i) + " overflows float32");
        }
    }
    save_vector(std::span<const float>(narrowed), path);
}

std::vector<float> load_vector(const std::filesystem::path& path) {
    TensorFile tensor = read_tensor(path);
    if (tensor.shape.size() != 1) {
        throw Error(ErrorKind::Shape, path.string() + ": expected rank-1 tensor, got shape " + shape_text(tensor.shape));
    }
    return std::move(tensor.values);
}

}  // namespace vtprune
