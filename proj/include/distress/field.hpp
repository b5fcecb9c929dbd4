#pragma once

#include <compare>

#include "distress/wide.hpp"

namespace distress {

// Element of F_q in canonical form, 0 <= value < q. Only a PrimeField can
// construct checked elements; FieldElement itself carries no modulus.
class FieldElement {
public:
    constexpr FieldElement() = default;
    [[nodiscard]] constexpr u128 value() const { return v_; }
    [[nodiscard]] constexpr bool is_zero() const { return v_ == 0; }
    friend constexpr auto operator<=>(const FieldElement&, const FieldElement&) = default;

private:
    friend class PrimeField;
    explicit constexpr FieldElement(u128 v) : v_(v) {}
    u128 v_ = 0;
};

// Arithmetic modulo an odd prime q < 2^128.
//
// Products go through Montgomery reduction with R = 2^128 while elements stay
// in canonical form at the API boundary. The same code serves the 13-bit toy
// field, the 127-bit production field and the 128-bit scalar ring of the
// production group.
class PrimeField {
public:
    // Throws ParamsInvalid if q is even or < 3. Primality is not checked
    // here; see is_probable_prime().
    explicit PrimeField(u128 q);

    [[nodiscard]] u128 modulus() const { return q_; }
    // ceil(log2(q + 1)): width of a serialized element.
    [[nodiscard]] unsigned bit_len() const { return bit_len_; }

    // Reduces v mod q.
    [[nodiscard]] FieldElement reduce(u128 v) const { return FieldElement(v % q_); }
    // Rejects v >= q with InvalidFieldElement instead of reducing.
    [[nodiscard]] FieldElement from_canonical(u128 v) const;
    [[nodiscard]] FieldElement zero() const { return FieldElement(0); }
    [[nodiscard]] FieldElement one() const { return FieldElement(1); }

    [[nodiscard]] FieldElement add(FieldElement a, FieldElement b) const;
    [[nodiscard]] FieldElement sub(FieldElement a, FieldElement b) const;
    [[nodiscard]] FieldElement neg(FieldElement a) const;
    [[nodiscard]] FieldElement mul(FieldElement a, FieldElement b) const;
    [[nodiscard]] FieldElement sqr(FieldElement a) const { return mul(a, a); }
    [[nodiscard]] FieldElement pow(FieldElement base, u128 exponent) const;
    // Throws DivisionByZero for a == 0.
    [[nodiscard]] FieldElement inv(FieldElement a) const;

    // Euler criterion: v^((q-1)/2) in {0, 1}. Zero counts as a square.
    [[nodiscard]] bool is_square(FieldElement v) const;
    // Canonical (numerically smaller) root of v, computed as v^((q+1)/4).
    // Requires q = 3 mod 4. Throws NotASquare for non-residues.
    [[nodiscard]] FieldElement sqrt(FieldElement v) const;

    friend bool operator==(const PrimeField& a, const PrimeField& b) { return a.q_ == b.q_; }

private:
    [[nodiscard]] u128 redc(U256 t) const;

    u128 q_;
    u128 q_neg_inv_;  // -q^{-1} mod 2^128
    u128 r2_;         // 2^256 mod q
    unsigned bit_len_;
};

// Miller-Rabin with fixed small-prime bases plus `rounds` pseudo-random bases.
bool is_probable_prime(u128 n, int rounds = 16);

}  // namespace distress
