#include "distress/curve.hpp"

#include "distress/errors.hpp"

namespace distress {

Curve::Curve(PrimeField field, FieldElement a, FieldElement b) : field_(field), a_(a), b_(b) {
    const auto& f = field_;
    const FieldElement four_a3 = f.mul(f.reduce(4), f.mul(a, f.sqr(a)));
    const FieldElement b2_27 = f.mul(f.reduce(27), f.sqr(b));
    if (f.add(four_a3, b2_27).is_zero()) throw Error(ErrorCode::ParamsInvalid, "singular curve: 4a^3 + 27b^2 = 0");
}

FieldElement Curve::rhs(FieldElement x) const {
    const auto& f = field_;
    // (x^2 + a) * x + b
    return f.add(f.mul(f.add(f.sqr(x), a_), x), b_);
}

bool Curve::contains(const Point& p) const {
    if (p.infinity) return true;
    return field_.sqr(p.y) == rhs(p.x);
}

Point Curve::neg(const Point& p) const {
    if (p.infinity) return p;
    return Point::affine(p.x, field_.neg(p.y));
}

Point Curve::add(const Point& p, const Point& r) const {
    if (p.infinity) return r;
    if (r.infinity) return p;
    const auto& f = field_;
    FieldElement lambda;
    if (p.x == r.x) {
        if (p.y != r.y || p.y.is_zero()) return Point::at_infinity();
        // Tangent slope (3x^2 + a) / 2y.
        const FieldElement num = f.add(f.mul(f.reduce(3), f.sqr(p.x)), a_);
        lambda = f.mul(num, f.inv(f.add(p.y, p.y)));
    } else {
        lambda = f.mul(f.sub(r.y, p.y), f.inv(f.sub(r.x, p.x)));
    }
    const FieldElement x3 = f.sub(f.sub(f.sqr(lambda), p.x), r.x);
    const FieldElement y3 = f.sub(f.mul(lambda, f.sub(p.x, x3)), p.y);
    return Point::affine(x3, y3);
}

namespace {

struct Jacobian {
    FieldElement x, y, z;  // z == 0 encodes infinity
};

}  // namespace

Point Curve::scalar_mul(u128 k, const Point& p, OpTally* tally) const {
    if (tally != nullptr) ++tally->scalar_mults;
    if (k == 0 || p.infinity) return Point::at_infinity();

    const auto& f = field_;
    const FieldElement two = f.reduce(2);
    const FieldElement three = f.reduce(3);

    auto dbl_j = [&](const Jacobian& q) -> Jacobian {
        if (q.z.is_zero() || q.y.is_zero()) return {f.one(), f.one(), f.zero()};
        const FieldElement xx = f.sqr(q.x);
        const FieldElement yy = f.sqr(q.y);
        const FieldElement yyyy = f.sqr(yy);
        const FieldElement zz = f.sqr(q.z);
        const FieldElement s = f.mul(f.reduce(4), f.mul(q.x, yy));
        const FieldElement m = f.add(f.mul(three, xx), f.mul(a_, f.sqr(zz)));
        const FieldElement x3 = f.sub(f.sqr(m), f.mul(two, s));
        const FieldElement y3 = f.sub(f.mul(m, f.sub(s, x3)), f.mul(f.reduce(8), yyyy));
        const FieldElement z3 = f.mul(two, f.mul(q.y, q.z));
        return {x3, y3, z3};
    };

    // Mixed addition with the affine base point.
    auto add_j = [&](const Jacobian& q) -> Jacobian {
        if (q.z.is_zero()) return {p.x, p.y, f.one()};
        const FieldElement z1z1 = f.sqr(q.z);
        const FieldElement u2 = f.mul(p.x, z1z1);
        const FieldElement s2 = f.mul(p.y, f.mul(q.z, z1z1));
        const FieldElement h = f.sub(u2, q.x);
        const FieldElement r = f.sub(s2, q.y);
        if (h.is_zero()) {
            if (r.is_zero()) return dbl_j(q);
            return {f.one(), f.one(), f.zero()};
        }
        const FieldElement hh = f.sqr(h);
        const FieldElement hhh = f.mul(h, hh);
        const FieldElement v = f.mul(q.x, hh);
        const FieldElement x3 = f.sub(f.sub(f.sqr(r), hhh), f.mul(two, v));
        const FieldElement y3 = f.sub(f.mul(r, f.sub(v, x3)), f.mul(q.y, hhh));
        const FieldElement z3 = f.mul(q.z, h);
        return {x3, y3, z3};
    };

    Jacobian acc{f.one(), f.one(), f.zero()};
    for (unsigned i = bit_length(k); i-- > 0;) {
        acc = dbl_j(acc);
        if (test_bit(k, i)) acc = add_j(acc);
    }
    if (acc.z.is_zero()) return Point::at_infinity();
    const FieldElement zinv = f.inv(acc.z);
    const FieldElement zinv2 = f.sqr(zinv);
    return Point::affine(f.mul(acc.x, zinv2), f.mul(acc.y, f.mul(zinv2, zinv)));
}

CompressedPoint Curve::compress(const Point& p) const {
    if (p.infinity) throw Error(ErrorCode::CannotCompressIdentity, "point at infinity has no compressed form");
    const FieldElement root = field_.sqrt(rhs(p.x));
    return {p.x, p.y != root};
}

Point Curve::decompress(const CompressedPoint& c) const {
    const FieldElement v = rhs(c.x);
    if (!field_.is_square(v)) throw Error(ErrorCode::NotOnCurve, "x = " + to_string(c.x.value()) + " is not on the curve");
    const FieldElement root = field_.sqrt(v);
    return Point::affine(c.x, c.sign ? field_.neg(root) : root);
}

Point Curve::embed_message(u128 m, unsigned pad_bits) const {
    const unsigned bits = field_.bit_len();
    if (pad_bits >= bits) throw Error(ErrorCode::LayoutViolation, "pad_bits must be below the field bit length");
    if (bit_length(m) > bits - pad_bits) throw Error(ErrorCode::LayoutViolation, "message wider than bit_len - pad_bits");
    const u128 base = m << pad_bits;
    const u128 q = field_.modulus();
    for (u128 t = 0; t < (static_cast<u128>(1) << pad_bits); ++t) {
        const u128 x = base + t;
        if (x >= q) break;
        const FieldElement fx = field_.from_canonical(x);
        const FieldElement v = rhs(fx);
        if (field_.is_square(v)) return Point::affine(fx, field_.sqrt(v));
    }
    throw Error(ErrorCode::EmbeddingFailed, "no on-curve x for message " + to_string(m));
}

u128 Curve::extract_message(const Point& p, unsigned pad_bits) const {
    if (p.infinity) throw Error(ErrorCode::InvalidPoint, "cannot extract a message from infinity");
    return p.x.value() >> pad_bits;
}

}  // namespace distress
