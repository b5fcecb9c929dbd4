#include "distress/codec.hpp"

#include "distress/errors.hpp"

namespace distress {

void BitLayout::validate(unsigned bit_len) const {
    if (m_d == 0 || m_i == 0 || m_t == 0) throw Error(ErrorCode::LayoutViolation, "layout widths must be positive");
    if (m_d + m_i + m_t + pad_bits != bit_len) {
        throw Error(ErrorCode::LayoutViolation, "m_d + m_i + m_t + pad_bits = " +
                                                    std::to_string(m_d + m_i + m_t + pad_bits) + ", field has " +
                                                    std::to_string(bit_len) + " bits");
    }
}

u128 pack_payload(const BitLayout& layout, const DistressPayload& payload) {
    if (payload.id.width != layout.m_i || payload.tag.width != layout.m_t) {
        throw Error(ErrorCode::LayoutViolation, "payload widths do not match the layout");
    }
    if (bit_length(payload.id.value) > layout.m_i || bit_length(payload.tag.value) > layout.m_t) {
        throw Error(ErrorCode::LayoutViolation, "payload value overflows its field");
    }
    const u128 marker = low_mask(layout.m_d);
    return (marker << (layout.m_i + layout.m_t)) | (payload.id.value << layout.m_t) | payload.tag.value;
}

DistressPayload unpack_payload(const BitLayout& layout, u128 plaintext) {
    DistressPayload p;
    p.id = {(plaintext >> layout.m_t) & low_mask(layout.m_i), layout.m_i};
    p.tag = {plaintext & low_mask(layout.m_t), layout.m_t};
    return p;
}

bool has_marker(const BitLayout& layout, u128 plaintext) {
    return (plaintext >> (layout.m_i + layout.m_t)) == low_mask(layout.m_d);
}

NonceCodec::NonceCodec(Meceg scheme, BitLayout layout) : scheme_(std::move(scheme)), layout_(layout) {
    layout_.validate(scheme_.curve().field().bit_len());
}

NonceWire NonceCodec::encode(const DistressPayload& payload, const Point& pk, Prg& prg) const {
    const Point m = scheme_.curve().embed_message(pack_payload(layout_, payload), layout_.pad_bits);
    NonceWire wire;
    if (scheme_.ciphertext_bits() < NonceWire::kBits) prg.fill(wire.bytes);
    scheme_.write(scheme_.encrypt(pk, m, prg), wire);
    return wire;
}

std::optional<NonceWire> NonceCodec::encode_with_ephemeral(const DistressPayload& payload, const Point& pk,
                                                           u128 k) const {
    const Point m = scheme_.curve().embed_message(pack_payload(layout_, payload), layout_.pad_bits);
    auto ct = scheme_.encrypt_with_ephemeral(pk, m, k);
    if (!ct) return std::nullopt;
    return scheme_.serialize(*ct);
}

DecodeResult NonceCodec::decode(const NonceWire& wire, u128 sk, OpTally* tally) const {
    const auto ct = scheme_.try_deserialize(wire);
    if (!ct) return std::nullopt;
    const Point m = scheme_.decrypt(sk, *ct, tally);
    if (m.infinity) return std::nullopt;
    const u128 r = scheme_.curve().extract_message(m, layout_.pad_bits);
    if (!has_marker(layout_, r)) return std::nullopt;
    return unpack_payload(layout_, r);
}

NonceWire prg_nonce(Prg& prg) {
    NonceWire wire;
    prg.fill(wire.bytes);
    return wire;
}

NonceWire reversible_nonce(bool distress, const std::optional<DistressPayload>& payload, const NonceCodec& codec,
                           const Point& pk, Prg& prg) {
    if (distress != payload.has_value()) {
        throw Error(ErrorCode::ContractViolation, "payload must be present exactly when the distress flag is set");
    }
    return distress ? codec.encode(*payload, pk, prg) : prg_nonce(prg);
}

}  // namespace distress
