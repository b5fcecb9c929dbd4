#include "distress/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/kdf.h>
#include <openssl/sha.h>

#include <memory>

#include "distress/errors.hpp"
#include "json.hpp"

namespace distress {

namespace {

using nlohmann::json;

std::size_t coord_bytes(const Curve& curve) { return (curve.field().bit_len() + 7) / 8; }

// Hash to a scalar in [0, n).
u128 hash_to_scalar(std::span<const std::uint8_t> digest, u128 n) {
    const u128 hi = be_value(digest.subspan(0, 16));
    const u128 lo = be_value(digest.subspan(16, 16));
    // (hi * 2^128 + lo) mod n, folding 128 bits at a time
    const PrimeField r(n);
    const auto two64 = r.reduce(static_cast<u128>(1) << 64);
    const auto shift = r.mul(two64, two64);
    return r.add(r.mul(r.reduce(hi), shift), r.reduce(lo)).value();
}

Bytes challenge_input(const Profile& p, const Point& rp, const Point& vk, std::span<const std::uint8_t> message) {
    FieldWriter w;
    w.add("schnorr");
    w.add(point_bytes(p.curve, rp));
    w.add(point_bytes(p.curve, vk));
    w.add(message);
    return w.take();
}

Bytes cert_message(const Profile& p, const std::string& subject, const Point& vk) {
    FieldWriter w;
    w.add("certificate");
    w.add(subject);
    w.add(point_bytes(p.curve, vk));
    return w.take();
}

const EVP_CIPHER* ctr_cipher(std::size_t key_len) {
    if (key_len == 16) return EVP_aes_128_ctr();
    if (key_len == 32) return EVP_aes_256_ctr();
    throw Error(ErrorCode::ContractViolation, "symmetric key must be 16 or 32 bytes");
}

Bytes ctr_apply(std::span<const std::uint8_t> key, std::span<const std::uint8_t> iv,
                std::span<const std::uint8_t> in) {
    std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)> ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    Bytes out(in.size());
    int len = 0;
    if (!ctx || EVP_EncryptInit_ex(ctx.get(), ctr_cipher(key.size()), nullptr, key.data(), iv.data()) != 1 ||
        EVP_EncryptUpdate(ctx.get(), out.data(), &len, in.data(), static_cast<int>(in.size())) != 1) {
        throw Error(ErrorCode::SessionFailure, "AES-CTR failed");
    }
    return out;
}

Bytes hkdf(std::span<const std::uint8_t> ikm, std::string_view info, std::size_t out_len) {
    std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr),
                                                                    EVP_PKEY_CTX_free);
    static const std::uint8_t salt[] = {'d', 'i', 's', 't', 'r', 'e', 's', 's'};
    Bytes out(out_len);
    std::size_t len = out_len;
    if (!ctx || EVP_PKEY_derive_init(ctx.get()) <= 0 || EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) <= 0 ||
        EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt, sizeof salt) <= 0 ||
        EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) <= 0 ||
        EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), reinterpret_cast<const unsigned char*>(info.data()),
                                    static_cast<int>(info.size())) <= 0 ||
        EVP_PKEY_derive(ctx.get(), out.data(), &len) <= 0 || len != out_len) {
        throw Error(ErrorCode::InvalidSeed, "HKDF failed");
    }
    return out;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, e.what());
    }
}

std::string hex_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_string()) {
        throw Error(ErrorCode::MalformedMessage, std::string("missing hex field ") + key);
    }
    return j.at(key).get<std::string>();
}

}  // namespace

Bytes sha256(std::span<const std::uint8_t> data) {
    Bytes out(SHA256_DIGEST_LENGTH);
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Bytes point_bytes(const Curve& curve, const Point& p) {
    if (p.infinity) return {0x00};
    const std::size_t w = coord_bytes(curve);
    Bytes out{0x04};
    const Bytes x = be_bytes(p.x.value(), w);
    const Bytes y = be_bytes(p.y.value(), w);
    out.insert(out.end(), x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    return out;
}

Point point_from_bytes(const Curve& curve, std::span<const std::uint8_t> data) {
    if (data.size() == 1 && data[0] == 0x00) return Point::at_infinity();
    const std::size_t w = coord_bytes(curve);
    if (data.size() != 1 + 2 * w || data[0] != 0x04) throw Error(ErrorCode::InvalidPoint, "bad point encoding");
    const u128 x = be_value(data.subspan(1, w));
    const u128 y = be_value(data.subspan(1 + w, w));
    const auto& f = curve.field();
    if (x >= f.modulus() || y >= f.modulus()) throw Error(ErrorCode::InvalidPoint, "coordinate out of range");
    const Point p = Point::affine(f.from_canonical(x), f.from_canonical(y));
    if (!curve.contains(p)) throw Error(ErrorCode::InvalidPoint, "point is not on the curve");
    return p;
}

std::string SharedSeed::to_hex() const { return distress::to_hex(bytes_); }

SharedSeed SharedSeed::from_hex(std::string_view hex) { return seed_from_bytes(distress::from_hex(hex)); }

SharedSeed seed_from_bytes(std::span<const std::uint8_t> data) {
    SharedSeed s;
    s.bytes_.assign(data.begin(), data.end());
    return s;
}

DhKeyShare dh_keygen(const Profile& profile, Prg& prg) {
    const u128 n = profile.group_order();
    const u128 x = prg.range(1, n);
    return {x, profile.curve.scalar_mul(x, profile.gen)};
}

SharedSeed dh_combine(const Profile& profile, const DhKeyShare& mine, const Point& theirs) {
    if (theirs.infinity || !profile.curve.contains(theirs)) {
        throw Error(ErrorCode::DegenerateShare, "peer share is not a finite curve point");
    }
    const Point shared = profile.curve.scalar_mul(mine.exponent, theirs);
    if (shared.infinity) throw Error(ErrorCode::DegenerateShare, "shared point is the identity");
    SharedSeed s;
    s.bytes_ = be_bytes(shared.x.value(), coord_bytes(profile.curve));
    return s;
}

DerivedKeys kdf(const SharedSeed& seed, std::string_view label, std::size_t key_bytes) {
    if (seed.bytes_.empty()) throw Error(ErrorCode::InvalidSeed, "empty seed");
    const std::string base(label);
    return {hkdf(seed.bytes_, base + "/enc", key_bytes), hkdf(seed.bytes_, base + "/mac", key_bytes)};
}

Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message) {
    Bytes out(32);
    unsigned len = 0;
    static const std::uint8_t empty = 0;
    HMAC(EVP_sha256(), key.empty() ? &empty : key.data(), static_cast<int>(key.size()),
         message.empty() ? &empty : message.data(), message.size(), out.data(), &len);
    return out;
}

u128 MacTag::value() const {
    if (bits > 128) throw Error(ErrorCode::ContractViolation, "tag wider than 128 bits");
    u128 v = 0;
    for (std::uint8_t b : bytes) v = (v << 8) | b;
    const unsigned spare = static_cast<unsigned>(bytes.size()) * 8 - bits;
    return v >> spare;
}

MacTag MacTag::from_value(u128 value, unsigned bits) {
    if (bits == 0 || bits > 128) throw Error(ErrorCode::ContractViolation, "tag width out of range");
    const std::size_t nbytes = (bits + 7) / 8;
    const unsigned spare = static_cast<unsigned>(nbytes) * 8 - bits;
    MacTag t;
    t.bits = bits;
    t.bytes = be_bytes((value & low_mask(bits)) << spare, nbytes);
    return t;
}

MacTag mac_sign(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message, unsigned bits) {
    if (bits == 0 || bits > 256) throw Error(ErrorCode::ContractViolation, "MAC width out of range");
    Bytes full = hmac_sha256(key, message);
    const std::size_t nbytes = (bits + 7) / 8;
    full.resize(nbytes);
    if (bits % 8 != 0) full.back() &= static_cast<std::uint8_t>(0xff << (8 - bits % 8));
    return {std::move(full), bits};
}

bool mac_verify(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message, const MacTag& tag) noexcept {
    try {
        if (tag.bits == 0 || tag.bits > 256 || tag.bytes.size() != (tag.bits + 7) / 8) return false;
        const MacTag expect = mac_sign(key, message, tag.bits);
        return CRYPTO_memcmp(expect.bytes.data(), tag.bytes.data(), expect.bytes.size()) == 0;
    } catch (...) {
        return false;
    }
}

Bytes Signature::to_bytes() const {
    Bytes out = be_bytes(e, 16);
    const Bytes sb = be_bytes(s, 16);
    out.insert(out.end(), sb.begin(), sb.end());
    return out;
}

Signature Signature::from_bytes(std::span<const std::uint8_t> data) {
    if (data.size() != 32) throw Error(ErrorCode::MalformedMessage, "signature must be 32 bytes");
    return {be_value(data.subspan(0, 16)), be_value(data.subspan(16, 16))};
}

SigKeyPair sig_keygen(const Profile& profile, Prg& prg) {
    const u128 sk = prg.range(1, profile.group_order());
    return {sk, profile.curve.scalar_mul(sk, profile.gen)};
}

Signature sig_sign(const Profile& profile, const SigKeyPair& key, std::span<const std::uint8_t> message) {
    const u128 n = profile.group_order();
    const PrimeField r(n);
    const Bytes skb = be_bytes(key.sk, 16);
    for (std::uint64_t counter = 0;; ++counter) {
        FieldWriter w;
        w.add(message).add_u64(counter);
        const u128 k = hash_to_scalar(hmac_sha256(skb, w.bytes()), n);
        if (k == 0) continue;
        const Point rp = profile.curve.scalar_mul(k, profile.gen);
        const u128 e = hash_to_scalar(sha256(challenge_input(profile, rp, key.vk, message)), n);
        const u128 s = r.add(r.from_canonical(k), r.mul(r.from_canonical(e), r.reduce(key.sk))).value();
        if (s == 0) continue;
        return {e, s};
    }
}

bool sig_verify(const Profile& profile, const Point& vk, std::span<const std::uint8_t> message, const Signature& sig) {
    if (!profile.order_hint) return false;
    const u128 n = *profile.order_hint;
    if (sig.e >= n || sig.s == 0 || sig.s >= n) return false;
    if (vk.infinity || !profile.curve.contains(vk)) return false;
    const Point sg = profile.curve.scalar_mul(sig.s, profile.gen);
    const Point ev = profile.curve.scalar_mul(sig.e, vk);
    const Point rp = profile.curve.sub(sg, ev);
    return hash_to_scalar(sha256(challenge_input(profile, rp, vk, message)), n) == sig.e;
}

Certificate cert_issue(const Profile& profile, const SigKeyPair& root, const std::string& subject, const Point& vk) {
    return {subject, vk, sig_sign(profile, root, cert_message(profile, subject, vk))};
}

bool cert_verify(const Profile& profile, const Point& root_vk, const Certificate& cert) {
    return sig_verify(profile, root_vk, cert_message(profile, cert.subject, cert.subject_vk), cert.issuer_sig);
}

Bytes cert_bytes(const Profile& profile, const Certificate& cert) {
    FieldWriter w;
    w.add(cert.subject).add(point_bytes(profile.curve, cert.subject_vk)).add(cert.issuer_sig.to_bytes());
    return w.take();
}

Certificate cert_from_bytes(const Profile& profile, std::span<const std::uint8_t> data) {
    FieldReader r(data);
    Certificate c;
    c.subject = r.next_text();
    c.subject_vk = point_from_bytes(profile.curve, r.next());
    c.issuer_sig = Signature::from_bytes(r.next());
    r.expect_done();
    return c;
}

std::string cert_to_json(const Profile& profile, const Certificate& cert) {
    json j;
    j["subject"] = cert.subject;
    j["subject_vk"] = to_hex(point_bytes(profile.curve, cert.subject_vk));
    j["issuer_sig"] = to_hex(cert.issuer_sig.to_bytes());
    return j.dump(2) + "\n";
}

Certificate cert_from_json(const Profile& profile, const std::string& text) {
    const json j = parse_json(text);
    if (!j.is_object() || !j.contains("subject") || !j.at("subject").is_string()) {
        throw Error(ErrorCode::MalformedMessage, "certificate needs a subject");
    }
    return {j.at("subject").get<std::string>(), point_from_bytes(profile.curve, from_hex(hex_field(j, "subject_vk"))),
            Signature::from_bytes(from_hex(hex_field(j, "issuer_sig")))};
}

std::string sig_key_to_json(const Profile& profile, const SigKeyPair& key) {
    json j;
    j["sk"] = to_hex(be_bytes(key.sk, 16));
    j["vk"] = to_hex(point_bytes(profile.curve, key.vk));
    return j.dump(2) + "\n";
}

SigKeyPair sig_key_from_json(const Profile& profile, const std::string& text) {
    const json j = parse_json(text);
    SigKeyPair k{be_value(from_hex(hex_field(j, "sk"))), point_from_bytes(profile.curve, from_hex(hex_field(j, "vk")))};
    if (profile.curve.scalar_mul(k.sk, profile.gen) != k.vk) {
        throw Error(ErrorCode::MalformedMessage, "verification key does not match the secret");
    }
    return k;
}

Bytes sym_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> plaintext, Prg& prg) {
    Bytes out = prg.bytes(16);
    const Bytes ct = ctr_apply(key, out, plaintext);
    out.insert(out.end(), ct.begin(), ct.end());
    return out;
}

Bytes sym_decrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> blob) {
    if (blob.size() < 16) throw Error(ErrorCode::MalformedMessage, "ciphertext shorter than its IV");
    return ctr_apply(key, blob.subspan(0, 16), blob.subspan(16));
}

PasswordHash password_hash(std::string_view password, Prg& prg, unsigned iterations) {
    PasswordHash h;
    h.salt = prg.bytes(16);
    h.iterations = iterations;
    h.hash.resize(32);
    PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), h.salt.data(),
                      static_cast<int>(h.salt.size()), static_cast<int>(iterations), EVP_sha256(), 32, h.hash.data());
    return h;
}

bool password_verify(std::string_view password, const PasswordHash& stored) {
    if (stored.hash.size() != 32 || stored.iterations == 0) return false;
    Bytes h(32);
    PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), stored.salt.data(),
                      static_cast<int>(stored.salt.size()), static_cast<int>(stored.iterations), EVP_sha256(), 32,
                      h.data());
    return CRYPTO_memcmp(h.data(), stored.hash.data(), 32) == 0;
}

}  // namespace distress
