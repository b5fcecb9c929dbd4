#pragma once

#include <string>

#include "distress/crypto.hpp"
#include "distress/meceg.hpp"

namespace distress {

// ClientHello stand-in. Constant filler, then the 32-byte client random at a
// fixed offset, then the client key share:
//   16 03 01 00 00 | 01 00 00 00 | 03 03 | client_random | u16 len | share
struct HelloFrame {
    static constexpr std::size_t kRandomOffset = 11;

    NonceWire client_random;
    Bytes key_share;

    [[nodiscard]] Bytes encode() const;
    // Throws MalformedMessage unless the filler matches exactly, so parsing
    // is a bijection onto encode()'s image.
    static HelloFrame decode(std::span<const std::uint8_t> frame);

    friend bool operator==(const HelloFrame&, const HelloFrame&) = default;
};

// Established record layer: AES-CTR then HMAC-SHA256 over the direction
// label, sequence number and ciphertext. Records must be opened in order.
class SecureChannel {
public:
    SecureChannel(DerivedKeys send, DerivedKeys recv) : send_(std::move(send)), recv_(std::move(recv)) {}

    [[nodiscard]] Bytes seal(std::span<const std::uint8_t> plaintext, Prg& prg);
    // Throws SessionFailure on a bad MAC, wrong sequence number or framing.
    [[nodiscard]] Bytes open(std::span<const std::uint8_t> record);

private:
    DerivedKeys send_;
    DerivedKeys recv_;
    std::uint64_t send_seq_ = 0;
    std::uint64_t recv_seq_ = 0;
};

// Server side of the handshake: answers a hello with its share, certificate
// and a signature over (client_random, g^x, g^y, subject).
struct SessionAccept {
    Bytes server_hello;
    SecureChannel channel;
};

SessionAccept session_accept(const Profile& profile, const Certificate& cert, const SigKeyPair& key,
                             const HelloFrame& hello, Prg& prg);

// Client side: authenticates the server against the root key and expected
// subject before deriving keys.
class SessionClient {
public:
    SessionClient(const Profile& profile, Point root_vk, std::string expected_subject)
        : profile_(profile), root_vk_(root_vk), subject_(std::move(expected_subject)) {}

    [[nodiscard]] HelloFrame hello(const NonceWire& client_random, Prg& prg);
    // Throws SessionFailure when the certificate, subject or signature fails.
    [[nodiscard]] SecureChannel finish(std::span<const std::uint8_t> server_hello);

private:
    const Profile& profile_;
    Point root_vk_;
    std::string subject_;
    DhKeyShare share_;
    NonceWire random_;
    bool started_ = false;
};

}  // namespace distress
