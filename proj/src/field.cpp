#include "distress/field.hpp"

#include <array>

#include "distress/errors.hpp"

namespace distress {

namespace {

u128 add_mod_slow(u128 a, u128 b, u128 m) {
    // a, b < m; when m >= 2^127 the sum may wrap, in which case the true sum
    // exceeds m and the wrapped subtraction lands on the right value.
    const u128 s = a + b;
    return (s < a || s >= m) ? s - m : s;
}

}  // namespace

PrimeField::PrimeField(u128 q) : q_(q) {
    if (q < 3 || (q & 1) == 0) throw Error(ErrorCode::ParamsInvalid, "field modulus must be an odd prime >= 3");
    bit_len_ = bit_length(q);

    // Newton iteration for q^{-1} mod 2^128; each step doubles the correct bits.
    u128 inv = q;
    for (int i = 0; i < 7; ++i) inv *= 2 - q * inv;
    q_neg_inv_ = ~inv + 1;

    // 2^128 mod q, then square it by repeated doubling.
    const u128 r1 = (~q + 1) % q;
    u128 acc = 0;
    for (unsigned i = bit_length(r1); i-- > 0;) {
        acc = add_mod_slow(acc, acc, q);
        if (test_bit(r1, i)) acc = add_mod_slow(acc, r1, q);
    }
    r2_ = acc;
}

FieldElement PrimeField::from_canonical(u128 v) const {
    if (v >= q_) throw Error(ErrorCode::InvalidFieldElement, "value " + to_string(v) + " is not below q");
    return FieldElement(v);
}

u128 PrimeField::redc(U256 t) const {
    const u128 m = t.lo * q_neg_inv_;
    const U256 mq = mul_wide(m, q_);
    // t.lo + mq.lo == 0 mod 2^128; the carry out is set unless both are zero.
    // The true result is below 2q, which may exceed 2^128 for q >= 2^127.
    const u128 carry = t.lo != 0 ? 1 : 0;
    u128 r = t.hi + mq.hi;
    bool wrapped = r < t.hi;
    r += carry;
    wrapped = wrapped || r < carry;
    if (wrapped || r >= q_) r -= q_;
    return r;
}

FieldElement PrimeField::add(FieldElement a, FieldElement b) const { return FieldElement(add_mod_slow(a.v_, b.v_, q_)); }

FieldElement PrimeField::sub(FieldElement a, FieldElement b) const {
    return FieldElement(a.v_ >= b.v_ ? a.v_ - b.v_ : q_ - (b.v_ - a.v_));
}

FieldElement PrimeField::neg(FieldElement a) const { return FieldElement(a.v_ == 0 ? 0 : q_ - a.v_); }

FieldElement PrimeField::mul(FieldElement a, FieldElement b) const {
    // redc(a*b) = ab/R; multiplying by R^2 and reducing again restores ab.
    const u128 t = redc(mul_wide(a.v_, b.v_));
    return FieldElement(redc(mul_wide(t, r2_)));
}

FieldElement PrimeField::pow(FieldElement base, u128 exponent) const {
    FieldElement acc = one();
    for (unsigned i = bit_length(exponent); i-- > 0;) {
        acc = sqr(acc);
        if (test_bit(exponent, i)) acc = mul(acc, base);
    }
    return acc;
}

FieldElement PrimeField::inv(FieldElement a) const {
    if (a.is_zero()) throw Error(ErrorCode::DivisionByZero, "inverse of zero");
    return pow(a, q_ - 2);
}

bool PrimeField::is_square(FieldElement v) const {
    if (v.is_zero()) return true;
    return pow(v, (q_ - 1) / 2).value() == 1;
}

FieldElement PrimeField::sqrt(FieldElement v) const {
    if ((q_ & 3) != 3) throw Error(ErrorCode::ParamsInvalid, "sqrt requires q = 3 mod 4");
    const FieldElement r = pow(v, (q_ + 1) / 4);
    if (sqr(r) != v) throw Error(ErrorCode::NotASquare, to_string(v.value()) + " is not a quadratic residue");
    const FieldElement other = neg(r);
    return other.value() < r.value() ? other : r;
}

bool is_probable_prime(u128 n, int rounds) {
    if (n < 2) return false;
    static constexpr std::array<unsigned, 12> small{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (unsigned p : small) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    const PrimeField f(n);
    u128 d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (int round = 0; round < static_cast<int>(small.size()) + rounds; ++round) {
        u128 a;
        if (round < static_cast<int>(small.size())) {
            a = small[static_cast<std::size_t>(round)];
        } else {
            state = state * 6364136223846793005ull + 1442695040888963407ull;
            a = 2 + (static_cast<u128>(state) * state) % (n - 3);
        }
        FieldElement x = f.pow(f.reduce(a), d);
        if (x.value() == 1 || x.value() == n - 1) continue;
        bool composite = true;
        for (unsigned r = 1; r < s; ++r) {
            x = f.sqr(x);
            if (x.value() == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

}  // namespace distress
