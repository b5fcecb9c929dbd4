#include "distress/meceg.hpp"

#include "distress/errors.hpp"

namespace distress {

Meceg::Meceg(Curve curve, Point gen) : curve_(std::move(curve)), gen_(gen) {
    if (ciphertext_bits() > NonceWire::kBits) throw Error(ErrorCode::ParamsInvalid, "ciphertext does not fit in 256 bits");
    if (gen_.infinity || !curve_.contains(gen_)) throw Error(ErrorCode::ParamsInvalid, "generator is not a finite curve point");
}

McegKeyPair Meceg::keygen(Prg& prg) const {
    const u128 limit = static_cast<u128>(1) << curve_.field().bit_len();
    for (;;) {
        const u128 sk = prg.range(1, limit);
        const Point pk = curve_.scalar_mul(sk, gen_);
        if (!pk.infinity) return {sk, pk};
    }
}

McegKeyPair Meceg::keypair_from_secret(u128 sk) const {
    const Point pk = curve_.scalar_mul(sk, gen_);
    if (pk.infinity) throw Error(ErrorCode::ContractViolation, "secret key maps to the identity");
    return {sk, pk};
}

std::optional<McegCiphertext> Meceg::encrypt_with_ephemeral(const Point& pk, const Point& message, u128 k) const {
    if (message.infinity) throw Error(ErrorCode::InvalidPoint, "cannot encrypt the identity");
    const Point q = curve_.scalar_mul(k, gen_);
    const Point shared = curve_.scalar_mul(k, pk);
    if (q.infinity || shared.infinity) return std::nullopt;
    const Point r = curve_.add(message, shared);
    if (r.infinity) return std::nullopt;
    return McegCiphertext{curve_.compress(q), curve_.compress(r)};
}

McegCiphertext Meceg::encrypt(const Point& pk, const Point& message, Prg& prg) const {
    const u128 limit = static_cast<u128>(1) << curve_.field().bit_len();
    for (;;) {
        if (auto ct = encrypt_with_ephemeral(pk, message, prg.range(1, limit))) return *ct;
    }
}

Point Meceg::decrypt(u128 sk, const McegCiphertext& ct, OpTally* tally) const {
    const Point q = curve_.decompress(ct.c1);
    const Point r = curve_.decompress(ct.c2);
    return curve_.sub(r, curve_.scalar_mul(sk, q, tally));
}

void Meceg::write(const McegCiphertext& ct, NonceWire& wire) const {
    const unsigned xbits = curve_.field().bit_len();
    BitWriter w(wire.bytes);
    w.put(ct.c1.x.value(), xbits);
    w.put(ct.c1.sign ? 1 : 0, 1);
    w.put(ct.c2.x.value(), xbits);
    w.put(ct.c2.sign ? 1 : 0, 1);
}

NonceWire Meceg::serialize(const McegCiphertext& ct) const {
    NonceWire wire;
    write(ct, wire);
    return wire;
}

McegCiphertext Meceg::deserialize(const NonceWire& wire) const {
    const unsigned xbits = curve_.field().bit_len();
    const auto& f = curve_.field();
    BitReader r(wire.bytes);
    McegCiphertext ct;
    ct.c1.x = f.from_canonical(r.get(xbits));
    ct.c1.sign = r.get(1) != 0;
    ct.c2.x = f.from_canonical(r.get(xbits));
    ct.c2.sign = r.get(1) != 0;
    if (!curve_.is_on_curve(ct.c1.x) || !curve_.is_on_curve(ct.c2.x)) {
        throw Error(ErrorCode::NotOnCurve, "ciphertext slot is not an on-curve x-coordinate");
    }
    return ct;
}

std::optional<McegCiphertext> Meceg::try_deserialize(const NonceWire& wire) const {
    const unsigned xbits = curve_.field().bit_len();
    const auto& f = curve_.field();
    BitReader r(wire.bytes);
    std::array<CompressedPoint, 2> slots;
    for (auto& slot : slots) {
        const u128 x = r.get(xbits);
        slot.sign = r.get(1) != 0;
        if (x >= f.modulus()) return std::nullopt;
        slot.x = f.from_canonical(x);
        if (!curve_.is_on_curve(slot.x)) return std::nullopt;
    }
    return McegCiphertext{slots[0], slots[1]};
}

}  // namespace distress
