#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distress/wide.hpp"

namespace distress {

using Bytes = std::vector<std::uint8_t>;

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);

Bytes to_bytes(std::string_view s);
std::string to_text(std::span<const std::uint8_t> data);

// Big-endian fixed-width encoding of an integer into `width` bytes.
Bytes be_bytes(u128 value, std::size_t width);
u128 be_value(std::span<const std::uint8_t> data);

// Constant-time equality over equal-length spans; false on length mismatch.
bool ct_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// Length-prefixed field concatenation: each field is a 4-byte big-endian
// length followed by the bytes. Used for every multi-field MAC/signature input
// and for message bodies.
class FieldWriter {
public:
    FieldWriter& add(std::span<const std::uint8_t> field);
    FieldWriter& add(std::string_view field);
    FieldWriter& add_u64(std::uint64_t v);
    [[nodiscard]] const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class FieldReader {
public:
    explicit FieldReader(std::span<const std::uint8_t> data) : data_(data) {}
    Bytes next();
    std::string next_text();
    std::uint64_t next_u64();
    [[nodiscard]] bool done() const { return pos_ == data_.size(); }
    // Throws MalformedMessage when trailing bytes remain.
    void expect_done() const;

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

// MSB-first bit cursor over a byte buffer. Fields are at most 128 bits wide.
class BitWriter {
public:
    explicit BitWriter(std::span<std::uint8_t> out) : out_(out) {}
    void put(u128 value, unsigned bits);
    [[nodiscard]] std::size_t position() const { return pos_; }

private:
    std::span<std::uint8_t> out_;
    std::size_t pos_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}
    u128 get(unsigned bits);
    [[nodiscard]] std::size_t position() const { return pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace distress
