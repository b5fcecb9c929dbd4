#pragma once

#include <optional>

#include "distress/meceg.hpp"

namespace distress {

// Plaintext split inside the embedded message: marker | id | tag, MSB-first.
// m_d + m_i + m_t + pad_bits must equal the field bit length.
struct BitLayout {
    unsigned m_d = 0;
    unsigned m_i = 0;
    unsigned m_t = 0;
    unsigned pad_bits = 0;

    [[nodiscard]] unsigned payload_bits() const { return m_d + m_i + m_t; }
    // Throws LayoutViolation unless all widths are positive and the budget
    // matches bit_len exactly.
    void validate(unsigned bit_len) const;

    friend bool operator==(const BitLayout&, const BitLayout&) = default;
};

// Fixed-width bit string.
struct Bits {
    u128 value = 0;
    unsigned width = 0;

    friend bool operator==(const Bits&, const Bits&) = default;
};

struct DistressPayload {
    Bits id;
    Bits tag;

    friend bool operator==(const DistressPayload&, const DistressPayload&) = default;
};

// nullopt is "not distress".
using DecodeResult = std::optional<DistressPayload>;

// 1^m_d | id | tag. Throws LayoutViolation when widths disagree with the
// layout or a value overflows its width.
u128 pack_payload(const BitLayout& layout, const DistressPayload& payload);
// Splits id and tag out of a plaintext; the marker is not checked.
DistressPayload unpack_payload(const BitLayout& layout, u128 plaintext);
bool has_marker(const BitLayout& layout, u128 plaintext);

class NonceCodec {
public:
    NonceCodec(Meceg scheme, BitLayout layout);

    [[nodiscard]] const Meceg& scheme() const { return scheme_; }
    [[nodiscard]] const BitLayout& layout() const { return layout_; }

    // Encrypts the packed, embedded payload. When the ciphertext is shorter
    // than 256 bits the trailing wire bits are filled from `prg`.
    [[nodiscard]] NonceWire encode(const DistressPayload& payload, const Point& pk, Prg& prg) const;
    // Deterministic test hook: fixed ephemeral, zero filler. nullopt for a
    // degenerate ephemeral.
    [[nodiscard]] std::optional<NonceWire> encode_with_ephemeral(const DistressPayload& payload, const Point& pk,
                                                                 u128 k) const;

    // Total over all 256-bit inputs. Wires without ciphertext structure are
    // not distress and cost no scalar multiplication; structured wires cost
    // exactly one.
    [[nodiscard]] DecodeResult decode(const NonceWire& wire, u128 sk, OpTally* tally = nullptr) const;

private:
    Meceg scheme_;
    BitLayout layout_;
};

// The d = false branch: 256 pseudorandom bits.
NonceWire prg_nonce(Prg& prg);

// Fixed-length reversible function: encode when d is true, PRG otherwise.
// Throws ContractViolation unless the payload is present exactly when d is.
NonceWire reversible_nonce(bool distress, const std::optional<DistressPayload>& payload, const NonceCodec& codec,
                           const Point& pk, Prg& prg);

}  // namespace distress
