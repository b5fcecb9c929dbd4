#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "distress/census.hpp"
#include "distress/codec.hpp"

namespace distress {

// Curve, generator, layout and symmetric key size: everything that differs
// between the toy and production deployments.
struct Profile {
    std::string name;
    bool toy = false;
    Curve curve;
    Point gen;
    std::optional<u128> order_hint;
    BitLayout layout;
    unsigned key_bytes = 32;

    [[nodiscard]] Meceg scheme() const { return Meceg(curve, gen); }
    [[nodiscard]] NonceCodec codec() const { return NonceCodec(scheme(), layout); }
    // Throws MissingGroupOrder when no order_hint is configured.
    [[nodiscard]] u128 group_order() const;
};

Profile toy_profile();
Profile production_profile();
// "toy" or "production"; throws ParamsInvalid otherwise.
Profile builtin_profile(const std::string& name);

// JSON with decimal-string integers:
//   {"name", "toy", "q", "a", "b", "gen_x", "gen_y", "order_hint", "pad_bits",
//    "layout": {"m_d", "m_i", "m_t"}, "key_bytes"}
// Parsing failures and any failed validation throw ParamsInvalid.
Profile profile_from_json(const std::string& text);
std::string profile_to_json(const Profile& profile);
Profile load_profile(const std::filesystem::path& path);

// Checks q prime and q = 3 mod 4, a nonsingular curve, gen finite and on the
// curve, order_hint * gen = O, the layout budget and m_d >= 8 outside the toy
// profile. Throws ParamsInvalid naming the first failed check.
void validate_profile(const Profile& profile);

struct ToyCurveChoice {
    u128 a = 0;
    u128 b = 0;
    std::uint64_t group_order = 0;
    Point gen;
    double slot_fraction = 0;
    double false_positive_rate = 0;
};

// Scans (a, b) lexicographically from (1, 1) for a curve over F_q whose group
// order is prime and whose exhaustive statistics sit close to the large-field
// limit: slot fraction within `slot_tol` (relative) of 1/2 and the exact
// false-positive rate within `fp_tol` (relative) of 2^-(m_d+2). The generator
// is the point with the smallest x and the canonical y.
ToyCurveChoice find_toy_curve(u128 q, const BitLayout& layout, double slot_tol, double fp_tol);

}  // namespace distress
