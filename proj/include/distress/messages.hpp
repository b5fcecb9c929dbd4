#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "distress/bytes.hpp"

namespace distress {

enum class MsgType : std::uint8_t {
    ServerEnrolRequest = 1,   // g^b, B, Cert_B, pk_B' | Sign_B(g^b, B, pk_B')
    ServerEnrolResponse = 2,  // g^c
    UserEnrolHello = 3,       // usr, pwd, info, g^a, sqn
    WebsiteList = 4,          // identities...
    WebsiteSelection = 5,     // identities...
    UserEnrolComplete = 6,    // id, PK_A, g^c
    EnrolReject = 7,          // reason
    DistressForward = 8,      // B, c_BC, nonce_B | MAC_kBC(B, c_BC, nonce_B)
    DistressReply = 9,        // c_CB, s_AC, nonce_C | MAC_kBC(c_CB, s_AC, nonce_B, nonce_C)
};

const char* to_string(MsgType type);

// Frame: 1-byte type, 4-byte big-endian body length, then the body: each
// field length-prefixed in figure order, the authenticator last (empty when
// the message carries none).
struct Message {
    MsgType type{};
    std::vector<Bytes> fields;
    Bytes auth;

    [[nodiscard]] Bytes encode() const;
    // Throws MalformedMessage on unknown type, bad lengths, trailing bytes or a
    // field count the type does not allow.
    static Message decode(std::span<const std::uint8_t> frame);

    [[nodiscard]] const Bytes& field(std::size_t i) const;
    [[nodiscard]] std::string text(std::size_t i) const;

    friend bool operator==(const Message&, const Message&) = default;
};

// Length-prefixed concatenation of the given fields; the exact input of every
// multi-field MAC or signature.
Bytes joined(std::initializer_list<std::span<const std::uint8_t>> fields);

}  // namespace distress
