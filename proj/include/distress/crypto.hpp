#pragma once

#include <string>
#include <string_view>

#include "distress/bytes.hpp"
#include "distress/profile.hpp"

namespace distress {

Bytes sha256(std::span<const std::uint8_t> data);

// SEC1-style point bytes: 00 for infinity, else 04 | x | y with each
// coordinate big-endian in ceil(bit_len / 8) bytes.
Bytes point_bytes(const Curve& curve, const Point& p);
// Throws InvalidPoint for malformed bytes or off-curve coordinates.
Point point_from_bytes(const Curve& curve, std::span<const std::uint8_t> data);

// ---- Diffie-Hellman over the profile group ----

struct DerivedKeys {
    Bytes enc;
    Bytes mac;
};

struct DhKeyShare {
    u128 exponent = 0;
    Point share;
};

// Opaque DH output. Only kdf() turns it into usable keys; the hex form exists
// so the DCP database can persist it.
class SharedSeed {
public:
    SharedSeed() = default;
    [[nodiscard]] bool empty() const { return bytes_.empty(); }
    [[nodiscard]] std::string to_hex() const;
    static SharedSeed from_hex(std::string_view hex);
    friend bool operator==(const SharedSeed&, const SharedSeed&) = default;

private:
    friend SharedSeed dh_combine(const Profile&, const DhKeyShare&, const Point&);
    friend SharedSeed seed_from_bytes(std::span<const std::uint8_t>);
    friend DerivedKeys kdf(const SharedSeed&, std::string_view, std::size_t);
    Bytes bytes_;
};

// Test and session plumbing: wraps raw bytes as a seed.
SharedSeed seed_from_bytes(std::span<const std::uint8_t> data);

DhKeyShare dh_keygen(const Profile& profile, Prg& prg);
// Seed = x-coordinate of exponent * theirs. Throws DegenerateShare when the
// peer share is infinity, off the curve, or the product is infinity.
SharedSeed dh_combine(const Profile& profile, const DhKeyShare& mine, const Point& theirs);

// ---- key derivation and MAC ----

// HKDF-SHA256 with info label + "/enc" and label + "/mac". Throws InvalidSeed
// for an empty seed.
DerivedKeys kdf(const SharedSeed& seed, std::string_view label, std::size_t key_bytes);

Bytes hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message);

// Leftmost `bits` bits of HMAC-SHA256; unused low bits of the last byte are 0.
struct MacTag {
    Bytes bytes;
    unsigned bits = 0;

    // Tag as an integer, for bits <= 128.
    [[nodiscard]] u128 value() const;
    static MacTag from_value(u128 value, unsigned bits);
    friend bool operator==(const MacTag&, const MacTag&) = default;
};

// Throws ContractViolation when bits is 0 or above 256.
MacTag mac_sign(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message, unsigned bits);
// Constant-time over the tag bytes; never throws.
bool mac_verify(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message, const MacTag& tag) noexcept;

// ---- Schnorr signatures over the profile group ----

struct SigKeyPair {
    u128 sk = 0;
    Point vk;
};

struct Signature {
    u128 e = 0;
    u128 s = 0;

    [[nodiscard]] Bytes to_bytes() const;
    // Throws MalformedMessage unless exactly 32 bytes.
    static Signature from_bytes(std::span<const std::uint8_t> data);
    friend bool operator==(const Signature&, const Signature&) = default;
};

// All signature operations need profile.order_hint (MissingGroupOrder).
SigKeyPair sig_keygen(const Profile& profile, Prg& prg);
// Deterministic nonce k = HMAC(sk, message) mod n.
Signature sig_sign(const Profile& profile, const SigKeyPair& key, std::span<const std::uint8_t> message);
bool sig_verify(const Profile& profile, const Point& vk, std::span<const std::uint8_t> message, const Signature& sig);

// ---- certificates ----

struct Certificate {
    std::string subject;
    Point subject_vk;
    Signature issuer_sig;
};

Certificate cert_issue(const Profile& profile, const SigKeyPair& root, const std::string& subject, const Point& vk);
bool cert_verify(const Profile& profile, const Point& root_vk, const Certificate& cert);

// Length-prefixed subject | vk | signature, as carried inside messages.
Bytes cert_bytes(const Profile& profile, const Certificate& cert);
// Throws MalformedMessage on bad framing, InvalidPoint on a bad key.
Certificate cert_from_bytes(const Profile& profile, std::span<const std::uint8_t> data);

// JSON with hex-encoded fields.
std::string cert_to_json(const Profile& profile, const Certificate& cert);
Certificate cert_from_json(const Profile& profile, const std::string& text);
std::string sig_key_to_json(const Profile& profile, const SigKeyPair& key);
SigKeyPair sig_key_from_json(const Profile& profile, const std::string& text);

// ---- symmetric encryption: AES-CTR, 16-byte IV prepended ----

Bytes sym_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> plaintext, Prg& prg);
// Throws MalformedMessage when the blob is shorter than the IV.
Bytes sym_decrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> blob);

// ---- password storage ----

struct PasswordHash {
    Bytes salt;
    Bytes hash;
    unsigned iterations = 0;
};

PasswordHash password_hash(std::string_view password, Prg& prg, unsigned iterations = 20000);
bool password_verify(std::string_view password, const PasswordHash& stored);

}  // namespace distress
