#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>

#include "distress/bytes.hpp"
#include "distress/wide.hpp"

namespace distress {

// Seedable cryptographic PRG: AES-256-CTR keystream under key = SHA-256(seed).
// Every randomized operation in the library draws from a caller-owned Prg, so
// whole runs are reproducible from a single seed. Not thread-safe; give each
// thread its own stream via derive().
class Prg {
public:
    explicit Prg(std::uint64_t seed);
    explicit Prg(std::span<const std::uint8_t> seed);
    ~Prg();

    Prg(Prg&&) noexcept;
    Prg& operator=(Prg&&) noexcept;
    Prg(const Prg&) = delete;
    Prg& operator=(const Prg&) = delete;

    void fill(std::span<std::uint8_t> out);
    Bytes bytes(std::size_t n);
    std::uint64_t next_u64();
    bool coin();

    // Uniform integer with exactly `bits` random low bits (bits <= 128).
    u128 bits(unsigned bits);
    // Uniform in [0, bound); bound > 0.
    u128 below(u128 bound);
    // Uniform in [lo, hi); lo < hi.
    u128 range(u128 lo, u128 hi);
    // Uniform double in [0, 1).
    double uniform();

    // Independent stream for (label, index); does not advance this stream.
    [[nodiscard]] Prg derive(std::string_view label, std::uint64_t index) const;

private:
    struct Key {
        std::array<std::uint8_t, 32> bytes;
    };
    explicit Prg(const Key& key);
    void refill();

    Key key_{};
    struct Ctx;
    std::unique_ptr<Ctx> ctx_;
    std::array<std::uint8_t, 4096> buf_{};
    std::size_t pos_ = 0;
};

}  // namespace distress
