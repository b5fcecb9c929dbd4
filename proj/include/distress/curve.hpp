#pragma once

#include <cstdint>
#include <optional>

#include "distress/field.hpp"

namespace distress {

// Affine point on y^2 = x^3 + a*x + b, or the point at infinity.
struct Point {
    bool infinity = true;
    FieldElement x;
    FieldElement y;

    static Point at_infinity() { return {}; }
    static Point affine(FieldElement x, FieldElement y) { return {false, x, y}; }

    friend bool operator==(const Point&, const Point&) = default;
};

// x-coordinate plus one bit choosing the square root: sign 0 is the
// numerically smaller root, sign 1 is q minus it.
struct CompressedPoint {
    FieldElement x;
    bool sign = false;

    friend bool operator==(const CompressedPoint&, const CompressedPoint&) = default;
};

// Caller-owned operation counter. Passed down explicitly so concurrent
// callers never share hidden state.
struct OpTally {
    std::uint64_t scalar_mults = 0;
};

class Curve {
public:
    // Throws ParamsInvalid when 4a^3 + 27b^2 == 0.
    Curve(PrimeField field, FieldElement a, FieldElement b);

    [[nodiscard]] const PrimeField& field() const { return field_; }
    [[nodiscard]] FieldElement a() const { return a_; }
    [[nodiscard]] FieldElement b() const { return b_; }

    // x^3 + a*x + b
    [[nodiscard]] FieldElement rhs(FieldElement x) const;
    // True iff some y satisfies the curve equation at x.
    [[nodiscard]] bool is_on_curve(FieldElement x) const { return field_.is_square(rhs(x)); }
    [[nodiscard]] bool contains(const Point& p) const;

    [[nodiscard]] Point neg(const Point& p) const;
    [[nodiscard]] Point add(const Point& p, const Point& r) const;
    [[nodiscard]] Point dbl(const Point& p) const { return add(p, p); }
    [[nodiscard]] Point sub(const Point& p, const Point& r) const { return add(p, neg(r)); }

    // Double-and-add over Jacobian coordinates; one inversion at the end.
    // Increments tally->scalar_mults by one when a tally is supplied.
    [[nodiscard]] Point scalar_mul(u128 k, const Point& p, OpTally* tally = nullptr) const;

    // Throws CannotCompressIdentity for infinity.
    [[nodiscard]] CompressedPoint compress(const Point& p) const;
    // Throws NotOnCurve when x^3 + ax + b is a non-residue.
    [[nodiscard]] Point decompress(const CompressedPoint& c) const;

    // Try-and-increment embedding: x = (m << pad_bits) + t for the smallest t
    // with x < q and x on the curve; y is the canonical root.
    // Requires m < 2^(bit_len - pad_bits). Throws EmbeddingFailed when no
    // offset works and LayoutViolation when m is too wide.
    [[nodiscard]] Point embed_message(u128 m, unsigned pad_bits) const;
    // x(p) >> pad_bits; throws InvalidPoint for infinity.
    [[nodiscard]] u128 extract_message(const Point& p, unsigned pad_bits) const;

private:
    PrimeField field_;
    FieldElement a_;
    FieldElement b_;
};

}  // namespace distress
