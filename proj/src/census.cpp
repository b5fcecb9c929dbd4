#include "distress/census.hpp"

#include "distress/errors.hpp"

namespace distress {

double CurveCensus::slot_fraction() const {
    return static_cast<double>(valid_slot_values) / static_cast<double>(std::uint64_t{1} << bit_len);
}

double CurveCensus::structure_fraction() const {
    const double p = slot_fraction();
    return p * p;
}

CurveCensus take_census(const Curve& curve) {
    const auto& f = curve.field();
    if (f.bit_len() > 24) throw Error(ErrorCode::ParamsInvalid, "census needs a field of at most 24 bits");
    CurveCensus c;
    c.bit_len = f.bit_len();
    c.q = static_cast<std::uint64_t>(f.modulus());
    c.roots.assign(c.q, 0);
    c.group_order = 1;
    for (std::uint64_t x = 0; x < c.q; ++x) {
        const FieldElement v = curve.rhs(f.from_canonical(x));
        std::uint8_t n = 0;
        if (v.is_zero()) {
            n = 1;
        } else if (f.is_square(v)) {
            n = 2;
        }
        c.roots[x] = n;
        c.group_order += n;
        if (n != 0) ++c.valid_slot_values;
    }
    return c;
}

double exact_false_positive_rate(const CurveCensus& census, const BitLayout& layout) {
    const std::uint64_t n = census.group_order;
    if (!is_probable_prime(n)) throw Error(ErrorCode::ContractViolation, "exact model needs a prime group order");
    std::uint64_t marked = 0;
    for (std::uint64_t x = 0; x < census.q; ++x) {
        if (census.roots[x] != 0 && has_marker(layout, static_cast<u128>(x) >> layout.pad_bits)) {
            marked += census.roots[x];
        }
    }
    const double nd = static_cast<double>(n);
    return census.structure_fraction() * static_cast<double>(marked) * (nd - 2.0) / ((nd - 1.0) * (nd - 1.0));
}

}  // namespace distress
