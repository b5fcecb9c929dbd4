#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace distress {

__extension__ typedef unsigned __int128 u128;

struct U256 {
    u128 lo = 0;
    u128 hi = 0;
};

// Full 128x128 -> 256-bit product.
inline U256 mul_wide(u128 a, u128 b) {
    const auto a0 = static_cast<std::uint64_t>(a);
    const auto a1 = static_cast<std::uint64_t>(a >> 64);
    const auto b0 = static_cast<std::uint64_t>(b);
    const auto b1 = static_cast<std::uint64_t>(b >> 64);

    const u128 p00 = static_cast<u128>(a0) * b0;
    const u128 p01 = static_cast<u128>(a0) * b1;
    const u128 p10 = static_cast<u128>(a1) * b0;
    const u128 p11 = static_cast<u128>(a1) * b1;

    const u128 mid = (p00 >> 64) + static_cast<std::uint64_t>(p01) + static_cast<std::uint64_t>(p10);
    U256 r;
    r.lo = (mid << 64) | static_cast<std::uint64_t>(p00);
    r.hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
    return r;
}

inline unsigned bit_length(u128 v) {
    unsigned n = 0;
    while (v != 0) {
        ++n;
        v >>= 1;
    }
    return n;
}

inline bool test_bit(u128 v, unsigned i) { return ((v >> i) & 1) != 0; }

// 2^bits - 1, valid for bits in [0, 128].
inline u128 low_mask(unsigned bits) {
    if (bits >= 128) return ~static_cast<u128>(0);
    return (static_cast<u128>(1) << bits) - 1;
}

// Decimal conversions. parse_u128 throws distress::Error(InvalidNumber) on
// empty input, non-digits or overflow.
u128 parse_u128(std::string_view text);
std::string to_string(u128 v);

}  // namespace distress
