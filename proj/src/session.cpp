#include "distress/session.hpp"

#include <algorithm>

#include "distress/errors.hpp"
#include "distress/messages.hpp"

namespace distress {

namespace {

constexpr std::array<std::uint8_t, HelloFrame::kRandomOffset> kFiller = {0x16, 0x03, 0x01, 0x00, 0x00, 0x01,
                                                                          0x00, 0x00, 0x00, 0x03, 0x03};

Bytes transcript(const NonceWire& random, std::span<const std::uint8_t> client_share,
                 std::span<const std::uint8_t> server_share, const std::string& subject) {
    const Bytes subj = to_bytes(subject);
    return joined({random.bytes, client_share, server_share, subj});
}

DerivedKeys direction_keys(const SharedSeed& seed, const char* label, std::size_t key_bytes) {
    return kdf(seed, label, key_bytes);
}

}  // namespace

Bytes HelloFrame::encode() const {
    if (key_share.size() > 0xffff) throw Error(ErrorCode::MalformedMessage, "key share too long");
    Bytes out(kRandomOffset + NonceWire::kBytes);
    std::copy(kFiller.begin(), kFiller.end(), out.begin());
    std::copy(client_random.bytes.begin(), client_random.bytes.end(), out.begin() + kRandomOffset);
    out.push_back(static_cast<std::uint8_t>(key_share.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(key_share.size()));
    out.insert(out.end(), key_share.begin(), key_share.end());
    return out;
}

HelloFrame HelloFrame::decode(std::span<const std::uint8_t> frame) {
    constexpr std::size_t head = kRandomOffset + NonceWire::kBytes + 2;
    if (frame.size() < head) throw Error(ErrorCode::MalformedMessage, "hello frame too short");
    if (!std::equal(kFiller.begin(), kFiller.end(), frame.begin())) {
        throw Error(ErrorCode::MalformedMessage, "hello frame filler mismatch");
    }
    HelloFrame h;
    std::copy_n(frame.begin() + kRandomOffset, NonceWire::kBytes, h.client_random.bytes.begin());
    const std::size_t len = (static_cast<std::size_t>(frame[head - 2]) << 8) | frame[head - 1];
    if (frame.size() != head + len) throw Error(ErrorCode::MalformedMessage, "hello frame length mismatch");
    h.key_share.assign(frame.begin() + static_cast<std::ptrdiff_t>(head), frame.end());
    return h;
}

Bytes SecureChannel::seal(std::span<const std::uint8_t> plaintext, Prg& prg) {
    const Bytes seq = be_bytes(send_seq_++, 8);
    const Bytes blob = sym_encrypt(send_.enc, plaintext, prg);
    const Bytes mac = hmac_sha256(send_.mac, joined({seq, blob}));
    return joined({seq, blob, mac});
}

Bytes SecureChannel::open(std::span<const std::uint8_t> record) {
    try {
        FieldReader r(record);
        const Bytes seq = r.next();
        const Bytes blob = r.next();
        const Bytes mac = r.next();
        r.expect_done();
        if (!ct_equal(hmac_sha256(recv_.mac, joined({seq, blob})), mac)) {
            throw Error(ErrorCode::SessionFailure, "record MAC mismatch");
        }
        if (seq != be_bytes(recv_seq_, 8)) throw Error(ErrorCode::SessionFailure, "record out of sequence");
        ++recv_seq_;
        return sym_decrypt(recv_.enc, blob);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SessionFailure) throw;
        throw Error(ErrorCode::SessionFailure, e.what());
    }
}

SessionAccept session_accept(const Profile& profile, const Certificate& cert, const SigKeyPair& key,
                             const HelloFrame& hello, Prg& prg) {
    Point client_share;
    try {
        client_share = point_from_bytes(profile.curve, hello.key_share);
    } catch (const Error& e) {
        throw Error(ErrorCode::SessionFailure, e.what());
    }
    const DhKeyShare mine = dh_keygen(profile, prg);
    SharedSeed seed;
    try {
        seed = dh_combine(profile, mine, client_share);
    } catch (const Error& e) {
        throw Error(ErrorCode::SessionFailure, e.what());
    }
    const Bytes server_share = point_bytes(profile.curve, mine.share);
    const Signature sig =
        sig_sign(profile, key, transcript(hello.client_random, hello.key_share, server_share, cert.subject));
    Bytes server_hello = joined({server_share, cert_bytes(profile, cert), sig.to_bytes()});
    SecureChannel ch(direction_keys(seed, "session/s2c", profile.key_bytes),
                     direction_keys(seed, "session/c2s", profile.key_bytes));
    return {std::move(server_hello), std::move(ch)};
}

HelloFrame SessionClient::hello(const NonceWire& client_random, Prg& prg) {
    share_ = dh_keygen(profile_, prg);
    random_ = client_random;
    started_ = true;
    return {client_random, point_bytes(profile_.curve, share_.share)};
}

SecureChannel SessionClient::finish(std::span<const std::uint8_t> server_hello) {
    if (!started_) throw Error(ErrorCode::SessionFailure, "hello not sent");
    try {
        FieldReader r(server_hello);
        const Bytes server_share = r.next();
        const Certificate cert = cert_from_bytes(profile_, r.next());
        const Signature sig = Signature::from_bytes(r.next());
        r.expect_done();
        if (cert.subject != subject_) throw Error(ErrorCode::SessionFailure, "unexpected subject " + cert.subject);
        if (!cert_verify(profile_, root_vk_, cert)) throw Error(ErrorCode::SessionFailure, "certificate rejected");
        const Bytes my_share = point_bytes(profile_.curve, share_.share);
        if (!sig_verify(profile_, cert.subject_vk, transcript(random_, my_share, server_share, cert.subject), sig)) {
            throw Error(ErrorCode::SessionFailure, "handshake signature rejected");
        }
        const SharedSeed seed = dh_combine(profile_, share_, point_from_bytes(profile_.curve, server_share));
        return SecureChannel(direction_keys(seed, "session/c2s", profile_.key_bytes),
                             direction_keys(seed, "session/s2c", profile_.key_bytes));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SessionFailure) throw;
        throw Error(ErrorCode::SessionFailure, e.what());
    }
}

}  // namespace distress
