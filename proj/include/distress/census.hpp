#pragma once

#include <cstdint>
#include <vector>

#include "distress/codec.hpp"
#include "distress/curve.hpp"

namespace distress {

// Exhaustive point statistics for a small field (bit_len <= 24).
struct CurveCensus {
    unsigned bit_len = 0;
    std::uint64_t q = 0;
    // Number of y with y^2 = x^3 + ax + b, for each x in [0, q).
    std::vector<std::uint8_t> roots;
    // #E(F_q), including infinity.
    std::uint64_t group_order = 0;
    // x values in [0, 2^bit_len) that are < q and on the curve.
    std::uint64_t valid_slot_values = 0;

    // Probability that a uniformly random bit_len-bit slot holds a valid x.
    [[nodiscard]] double slot_fraction() const;
    // Probability that both slots of a uniform wire are valid.
    [[nodiscard]] double structure_fraction() const;
};

// Throws ParamsInvalid when the field is too large to enumerate.
CurveCensus take_census(const Curve& curve);

// Exact probability that a uniform 256-bit wire decodes as distress, for a
// prime-order group (no 2-torsion) and any secret key not divisible by the
// order. A structured wire is a uniform pair (Q, R) of finite points; the
// decrypted M = R - sk*Q is then uniform over the group minus -sk*Q, so
//   Pr = structure_fraction * |marked| * (n - 2) / (n - 1)^2
// where `marked` counts finite points whose embedded plaintext carries the
// marker. Throws ContractViolation when the group order is not prime.
double exact_false_positive_rate(const CurveCensus& census, const BitLayout& layout);

}  // namespace distress
