#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "distress/curve.hpp"
#include "distress/prg.hpp"

namespace distress {

// A 256-bit string: the TLS 1.3 ClientHello random.
struct NonceWire {
    static constexpr std::size_t kBytes = 32;
    static constexpr std::size_t kBits = kBytes * 8;
    std::array<std::uint8_t, kBytes> bytes{};

    friend bool operator==(const NonceWire&, const NonceWire&) = default;
};

struct McegKeyPair {
    u128 sk = 0;
    Point pk;
};

struct McegCiphertext {
    CompressedPoint c1;  // k*G
    CompressedPoint c2;  // M + k*pk

    friend bool operator==(const McegCiphertext&, const McegCiphertext&) = default;
};

// El Gamal over an elliptic curve with both ciphertext points sent in
// compressed form. Ciphertexts serialize MSB-first as
//   x(c1) | sign(c1) | x(c2) | sign(c2)
// with each x in bit_len bits, 2*(bit_len+1) bits in total (256 for the
// 127-bit field). Smaller fields occupy the leading bits of the wire.
class Meceg {
public:
    // Throws ParamsInvalid when the wire layout exceeds 256 bits or gen is
    // not a finite curve point.
    Meceg(Curve curve, Point gen);

    [[nodiscard]] const Curve& curve() const { return curve_; }
    [[nodiscard]] const Point& generator() const { return gen_; }
    [[nodiscard]] unsigned slot_bits() const { return curve_.field().bit_len() + 1; }
    [[nodiscard]] unsigned ciphertext_bits() const { return 2 * slot_bits(); }

    // sk uniform in [1, 2^bit_len), resampled while sk*G is infinity.
    [[nodiscard]] McegKeyPair keygen(Prg& prg) const;
    [[nodiscard]] McegKeyPair keypair_from_secret(u128 sk) const;

    // Fresh ephemeral k per call; degenerate draws are resampled.
    [[nodiscard]] McegCiphertext encrypt(const Point& pk, const Point& message, Prg& prg) const;
    // Deterministic variant with a caller-chosen ephemeral; nullopt when k
    // hits a degenerate case (k*G, k*pk or the sum at infinity).
    [[nodiscard]] std::optional<McegCiphertext> encrypt_with_ephemeral(const Point& pk, const Point& message,
                                                                       u128 k) const;

    // c2 - sk*c1. Exactly one scalar multiplication. Throws NotOnCurve if
    // either slot does not decompress.
    [[nodiscard]] Point decrypt(u128 sk, const McegCiphertext& ct, OpTally* tally = nullptr) const;

    // Writes the ciphertext into the leading bits of `wire`, leaving any
    // trailing bits untouched.
    void write(const McegCiphertext& ct, NonceWire& wire) const;
    [[nodiscard]] NonceWire serialize(const McegCiphertext& ct) const;
    // Throws InvalidFieldElement for an x slot >= q, NotOnCurve for an
    // off-curve x.
    [[nodiscard]] McegCiphertext deserialize(const NonceWire& wire) const;
    // Non-throwing variant: nullopt unless both slots are < q and on the curve.
    [[nodiscard]] std::optional<McegCiphertext> try_deserialize(const NonceWire& wire) const;
    [[nodiscard]] bool has_ciphertext_structure(const NonceWire& wire) const { return try_deserialize(wire).has_value(); }

private:
    Curve curve_;
    Point gen_;
};

}  // namespace distress
