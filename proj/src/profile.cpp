#include "distress/profile.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "distress/errors.hpp"
#include "json.hpp"

namespace distress {

namespace {

using nlohmann::json;

constexpr u128 kMersenne127 = (static_cast<u128>(1) << 127) - 1;

Profile make_profile(std::string name, bool toy, u128 q, u128 a, u128 b, u128 gx, u128 gy,
                     std::optional<u128> order, BitLayout layout, unsigned key_bytes) {
    const PrimeField f(q);
    Curve curve(f, f.from_canonical(a), f.from_canonical(b));
    const Point gen = Point::affine(f.from_canonical(gx), f.from_canonical(gy));
    return Profile{std::move(name), toy, std::move(curve), gen, order, layout, key_bytes};
}

u128 read_number(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::ParamsInvalid, std::string("missing field ") + key);
    const auto& v = j.at(key);
    if (v.is_string()) return parse_u128(v.get<std::string>());
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    throw Error(ErrorCode::ParamsInvalid, std::string("field ") + key + " must be a decimal string");
}

unsigned read_small(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
        throw Error(ErrorCode::ParamsInvalid, std::string("field ") + key + " must be a non-negative integer");
    }
    const auto v = j.at(key).get<std::uint64_t>();
    if (v > 256) throw Error(ErrorCode::ParamsInvalid, std::string("field ") + key + " out of range");
    return static_cast<unsigned>(v);
}

}  // namespace

u128 Profile::group_order() const {
    if (!order_hint) throw Error(ErrorCode::MissingGroupOrder, "profile " + name + " has no order_hint");
    return *order_hint;
}

Profile toy_profile() {
    // First (a, b) accepted by find_toy_curve(8191, {4, 3, 3, 3}, 0.01, 0.005).
    return make_profile("toy", true, 8191, 1, 361, 0, 19, 8179, BitLayout{4, 3, 3, 3}, 16);
}

Profile production_profile() {
    const u128 q = kMersenne127;
    const u128 gy = parse_u128("49026038158452913332518129282499498784");
    const u128 n = parse_u128("170141183460469231738365056381576295023");
    return make_profile("production", false, q, q - 3, 192, 1, gy, n, BitLayout{24, 32, 63, 8}, 32);
}

Profile builtin_profile(const std::string& name) {
    if (name == "toy") return toy_profile();
    if (name == "production") return production_profile();
    throw Error(ErrorCode::ParamsInvalid, "unknown profile '" + name + "'");
}

Profile profile_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParamsInvalid, std::string("profile is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParamsInvalid, "profile must be a JSON object");
    try {
        const u128 q = read_number(j, "q");
        const PrimeField f(q);
        auto checked = [&](const char* key) {
            const u128 v = read_number(j, key);
            if (v >= q) throw Error(ErrorCode::ParamsInvalid, std::string("field ") + key + " is not reduced mod q");
            return v;
        };
        std::optional<u128> order;
        if (j.contains("order_hint") && !j.at("order_hint").is_null()) order = read_number(j, "order_hint");
        if (!j.contains("layout") || !j.at("layout").is_object()) {
            throw Error(ErrorCode::ParamsInvalid, "missing layout object");
        }
        const auto& l = j.at("layout");
        const BitLayout layout{read_small(l, "m_d"), read_small(l, "m_i"), read_small(l, "m_t"), read_small(j, "pad_bits")};
        const unsigned key_bytes = j.contains("key_bytes") ? read_small(j, "key_bytes") : 32;
        const bool toy = j.value("toy", false);
        Profile p = make_profile(j.value("name", std::string(toy ? "toy" : "custom")), toy, q, checked("a"),
                                 checked("b"), checked("gen_x"), checked("gen_y"), order, layout, key_bytes);
        validate_profile(p);
        return p;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParamsInvalid) throw;
        throw Error(ErrorCode::ParamsInvalid, e.what());
    }
}

std::string profile_to_json(const Profile& p) {
    json j;
    j["name"] = p.name;
    j["toy"] = p.toy;
    j["q"] = to_string(p.curve.field().modulus());
    j["a"] = to_string(p.curve.a().value());
    j["b"] = to_string(p.curve.b().value());
    j["gen_x"] = to_string(p.gen.x.value());
    j["gen_y"] = to_string(p.gen.y.value());
    j["order_hint"] = p.order_hint ? json(to_string(*p.order_hint)) : json(nullptr);
    j["pad_bits"] = p.layout.pad_bits;
    j["layout"] = {{"m_d", p.layout.m_d}, {"m_i", p.layout.m_i}, {"m_t", p.layout.m_t}};
    j["key_bytes"] = p.key_bytes;
    return j.dump(2) + "\n";
}

Profile load_profile(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParamsInvalid, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return profile_from_json(ss.str());
}

void validate_profile(const Profile& p) {
    const auto& f = p.curve.field();
    const u128 q = f.modulus();
    auto fail = [](const std::string& why) { throw Error(ErrorCode::ParamsInvalid, why); };
    if (!is_probable_prime(q)) fail("q is not prime");
    if ((q & 3) != 3) fail("q is not 3 mod 4");
    // The Curve constructor already rejects a zero discriminant.
    if (p.gen.infinity || !p.curve.contains(p.gen)) fail("generator is not on the curve");
    if (p.order_hint) {
        if (*p.order_hint == 0) fail("order_hint is zero");
        if (!p.curve.scalar_mul(*p.order_hint, p.gen).infinity) fail("order_hint * gen is not the identity");
    }
    if (2 * (f.bit_len() + 1) > NonceWire::kBits) fail("ciphertext does not fit in 256 bits");
    try {
        p.layout.validate(f.bit_len());
    } catch (const Error& e) {
        fail(e.what());
    }
    if (p.layout.pad_bits == 0) fail("pad_bits must be positive");
    if (!p.toy && p.layout.m_d < 8) fail("m_d must be at least 8 outside the toy profile");
    if (p.key_bytes != 16 && p.key_bytes != 32) fail("key_bytes must be 16 or 32");
}

ToyCurveChoice find_toy_curve(u128 q, const BitLayout& layout, double slot_tol, double fp_tol) {
    const PrimeField f(q);
    const double fp_target = std::ldexp(1.0, -static_cast<int>(layout.m_d + 2));
    for (u128 a = 1; a < q; ++a) {
        for (u128 b = 1; b < q; ++b) {
            const FieldElement fa = f.from_canonical(a);
            const FieldElement fb = f.from_canonical(b);
            const FieldElement disc =
                f.add(f.mul(f.from_canonical(4), f.mul(fa, f.sqr(fa))), f.mul(f.from_canonical(27), f.sqr(fb)));
            if (disc.is_zero()) continue;
            const Curve curve(f, fa, fb);
            const CurveCensus census = take_census(curve);
            if (!is_probable_prime(census.group_order)) continue;
            if (std::abs(census.slot_fraction() / 0.5 - 1.0) > slot_tol) continue;
            const double fp = exact_false_positive_rate(census, layout);
            if (std::abs(fp / fp_target - 1.0) > fp_tol) continue;
            for (std::uint64_t x = 0; x < census.q; ++x) {
                if (census.roots[x] != 2) continue;
                const FieldElement fx = f.from_canonical(x);
                const Point gen = Point::affine(fx, f.sqrt(curve.rhs(fx)));
                return {a, b, census.group_order, gen, census.slot_fraction(), fp};
            }
        }
    }
    throw Error(ErrorCode::ParamsInvalid, "no toy curve satisfies the filter");
}

}  // namespace distress
