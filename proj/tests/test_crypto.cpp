#include <bit>
#include <fstream>

#include "doctest.h"
#include "distress/crypto.hpp"
#include "distress/errors.hpp"
#include "json.hpp"
#include "toy_oracle.hpp"

using namespace distress;

namespace {

nlohmann::json vectors() {
    std::ifstream in("tests/data/toy_vectors.json");
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

int hamming(const Bytes& a, const Bytes& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
    return d;
}

}  // namespace

TEST_CASE("dh symmetry and degenerate shares") {
    for (const Profile& p : {toy_profile(), production_profile()}) {
        Prg prg(1);
        for (int i = 0; i < 1000; ++i) {
            const auto a = dh_keygen(p, prg);
            const auto c = dh_keygen(p, prg);
            REQUIRE(dh_combine(p, a, c.share) == dh_combine(p, c, a.share));
        }
        const auto a = dh_keygen(p, prg);
        CHECK_THROWS_AS((void)dh_combine(p, a, Point::at_infinity()), Error);
        try {
            (void)dh_combine(p, a, Point::at_infinity());
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DegenerateShare);
        }
    }
    // a = 2, c = 3: seed is x(6G), checked against the python orbit oracle
    const Profile p = toy_profile();
    const auto doc = vectors().at("dh");
    const DhKeyShare a{2, p.curve.scalar_mul(2, p.gen)};
    const DhKeyShare c{3, p.curve.scalar_mul(3, p.gen)};
    CHECK(dh_combine(p, a, c.share).to_hex() == doc.at("seed").get<std::string>());
    const oracle::ToyCurve o{8191, 1, 361};
    const auto six = o.repeat(6, {false, 0, 19});
    CHECK(dh_combine(p, c, a.share).to_hex() == to_hex(be_bytes(static_cast<u128>(six.x), 2)));
}

TEST_CASE("kdf") {
    const auto seed = seed_from_bytes(Bytes{1, 2, 3, 4});
    const auto k1 = kdf(seed, "alice", 32);
    const auto k2 = kdf(seed, "alice", 32);
    CHECK(k1.enc == k2.enc);
    CHECK(k1.mac == k2.mac);
    CHECK(k1.enc != k1.mac);
    CHECK(k1.enc.size() == 32);
    CHECK(kdf(seed, "bob", 32).enc != k1.enc);
    CHECK(kdf(seed, "alice", 16).enc.size() == 16);
    try {
        (void)kdf(SharedSeed{}, "alice", 16);
        FAIL("empty seed accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidSeed);
    }

    for (const auto& v : vectors().at("kdf")) {
        const auto k = kdf(SharedSeed::from_hex(v.at("seed").get<std::string>()), v.at("label").get<std::string>(),
                           v.at("length").get<std::size_t>());
        CHECK(to_hex(k.enc) == v.at("enc").get<std::string>());
        CHECK(to_hex(k.mac) == v.at("mac").get<std::string>());
    }

    Prg prg(3);
    int worst = 256;
    for (int i = 0; i < 1000; ++i) {
        Bytes s = prg.bytes(16);
        const auto a = kdf(seed_from_bytes(s), "alice", 16);
        s[prg.below(16)] ^= static_cast<std::uint8_t>(1u << prg.below(8));
        const auto b = kdf(seed_from_bytes(s), "alice", 16);
        worst = std::min(worst, hamming(a.enc, b.enc) + hamming(a.mac, b.mac));
    }
    CHECK(worst >= static_cast<int>(0.3 * 256));
}

TEST_CASE("truncated mac") {
    for (const auto& v : vectors().at("mac")) {
        const Bytes key = from_hex(v.at("key").get<std::string>());
        const Bytes msg = from_hex(v.at("message").get<std::string>());
        const unsigned bits = v.at("bits").get<unsigned>();
        const MacTag t = mac_sign(key, msg, bits);
        CHECK(t.bits == bits);
        CHECK(to_string(t.value()) == v.at("value").get<std::string>());
        CHECK(mac_verify(key, msg, t));
        CHECK(mac_verify(key, msg, MacTag::from_value(t.value(), bits)));
    }
    Prg prg(4);
    const Bytes key = prg.bytes(32);
    for (int i = 0; i < 1000; ++i) {
        Bytes msg = prg.bytes(40);
        const MacTag t = mac_sign(key, msg, 63);
        REQUIRE(mac_verify(key, msg, t));
        msg[prg.below(40)] ^= static_cast<std::uint8_t>(1u << prg.below(8));
        REQUIRE_FALSE(mac_verify(key, msg, t));
    }
    // 63-bit tag is the prefix of the full HMAC
    const Bytes msg = to_bytes("prefix");
    const Bytes full = hmac_sha256(key, msg);
    const MacTag t = mac_sign(key, msg, 63);
    CHECK(t.bytes.size() == 8);
    CHECK(Bytes(full.begin(), full.begin() + 7) == Bytes(t.bytes.begin(), t.bytes.begin() + 7));
    CHECK((t.bytes[7] & 1) == 0);
    CHECK((t.bytes[7] >> 1) == (full[7] >> 1));
    MacTag wrong = t;
    wrong.bytes[0] ^= 0x80;
    CHECK_FALSE(mac_verify(key, msg, wrong));
    MacTag short_tag = t;
    short_tag.bytes.pop_back();
    CHECK_FALSE(mac_verify(key, msg, short_tag));
    CHECK_FALSE(mac_verify(key, msg, MacTag{}));
}

TEST_CASE("schnorr signatures") {
    const Profile toy = toy_profile();
    for (const auto& v : vectors().at("schnorr")) {
        const u128 sk = v.at("sk").get<std::uint64_t>();
        const SigKeyPair key{sk, toy.curve.scalar_mul(sk, toy.gen)};
        CHECK(to_hex(point_bytes(toy.curve, key.vk)) == v.at("vk").get<std::string>());
        const Bytes msg = from_hex(v.at("message").get<std::string>());
        const Signature sig = sig_sign(toy, key, msg);
        CHECK(to_hex(sig.to_bytes()) == v.at("sig").get<std::string>());
        CHECK(sig_verify(toy, key.vk, msg, sig));
    }
    const Profile p = production_profile();
    Prg prg(5);
    for (int i = 0; i < 200; ++i) {
        const auto key = sig_keygen(p, prg);
        const auto other = sig_keygen(p, prg);
        Bytes msg = prg.bytes(50);
        const auto sig = sig_sign(p, key, msg);
        REQUIRE(sig_verify(p, key.vk, msg, sig));
        CHECK(sig_sign(p, key, msg) == sig);
        CHECK_FALSE(sig_verify(p, other.vk, msg, sig));
        CHECK(Signature::from_bytes(sig.to_bytes()) == sig);
        msg[3] ^= 1;
        CHECK_FALSE(sig_verify(p, key.vk, msg, sig));
    }
}

TEST_CASE("certificates") {
    const Profile p = production_profile();
    Prg prg(6);
    const auto root = sig_keygen(p, prg);
    const auto other_root = sig_keygen(p, prg);
    const auto subject = sig_keygen(p, prg);
    const auto cert = cert_issue(p, root, "bank.example", subject.vk);
    CHECK(cert_verify(p, root.vk, cert));
    auto swapped = cert;
    swapped.subject_vk = other_root.vk;
    CHECK_FALSE(cert_verify(p, root.vk, swapped));
    auto renamed = cert;
    renamed.subject = "evil.example";
    CHECK_FALSE(cert_verify(p, root.vk, renamed));
    CHECK_FALSE(cert_verify(p, root.vk, cert_issue(p, other_root, "bank.example", subject.vk)));

    const auto back = cert_from_json(p, cert_to_json(p, cert));
    CHECK(back.subject == cert.subject);
    CHECK(back.subject_vk == cert.subject_vk);
    CHECK(back.issuer_sig == cert.issuer_sig);
    const auto key_back = sig_key_from_json(p, sig_key_to_json(p, subject));
    CHECK(key_back.sk == subject.sk);
    CHECK(key_back.vk == subject.vk);
    CHECK_THROWS_AS((void)cert_from_json(p, "{\"subject\": 3}"), Error);
}

TEST_CASE("symmetric encryption and passwords") {
    Prg prg(7);
    for (std::size_t len : {16u, 32u}) {
        const Bytes key = prg.bytes(len);
        const Bytes pt = to_bytes("embed at the footer");
        const Bytes ct = sym_encrypt(key, pt, prg);
        CHECK(ct.size() == pt.size() + 16);
        CHECK(sym_decrypt(key, ct) == pt);
        CHECK(sym_encrypt(key, pt, prg) != ct);
        CHECK(sym_decrypt(prg.bytes(len), ct) != pt);
    }
    CHECK_THROWS_AS((void)sym_decrypt(prg.bytes(16), Bytes(5)), Error);

    const auto h = password_hash("correct horse", prg, 1000);
    CHECK(password_verify("correct horse", h));
    CHECK_FALSE(password_verify("correct hose", h));
    CHECK(password_hash("correct horse", prg, 1000).salt != h.salt);
}

TEST_CASE("point encoding") {
    const Profile p = production_profile();
    CHECK(point_from_bytes(p.curve, point_bytes(p.curve, p.gen)) == p.gen);
    CHECK(point_from_bytes(p.curve, point_bytes(p.curve, Point::at_infinity())).infinity);
    Bytes b = point_bytes(p.curve, p.gen);
    b.back() ^= 1;
    CHECK_THROWS_AS((void)point_from_bytes(p.curve, b), Error);
}
