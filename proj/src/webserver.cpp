#include "distress/protocol.hpp"
#include "json.hpp"

namespace distress {

namespace {

using nlohmann::json;

[[noreturn]] void throw_reject(const Message& m) {
    const std::string name = m.text(0);
    const auto reason = reject_reason_from_string(name);
    if (!reason) throw Error(ErrorCode::MalformedMessage, "unknown reject reason " + name);
    throw Rejected(*reason);
}

}  // namespace

Webserver::Webserver(Profile profile, std::string identity, Certificate cert, SigKeyPair sig_key,
                     WebserverConfig config)
    : profile_(std::move(profile)),
      codec_(profile_.codec()),
      identity_(std::move(identity)),
      cert_(std::move(cert)),
      sig_key_(sig_key),
      config_(config) {}

Bytes Webserver::begin_enrolment(Prg& prg) {
    enc_ = codec_.scheme().keygen(prg);
    dh_ = dh_keygen(profile_, prg);
    const Bytes g_b = point_bytes(profile_.curve, dh_->share);
    const Bytes b = to_bytes(identity_);
    const Bytes pk = point_bytes(profile_.curve, enc_.pk);
    const Signature sig = sig_sign(profile_, sig_key_, joined({g_b, b, pk}));
    return Message{MsgType::ServerEnrolRequest, {g_b, b, cert_bytes(profile_, cert_), pk}, sig.to_bytes()}.encode();
}

void Webserver::finish_enrolment(std::span<const std::uint8_t> frame) {
    const Message m = Message::decode(frame);
    if (m.type == MsgType::EnrolReject) throw_reject(m);
    if (m.type != MsgType::ServerEnrolResponse || !dh_) {
        throw Error(ErrorCode::MalformedMessage, "unexpected enrolment response");
    }
    k_bc_ = dh_combine(profile_, *dh_, point_from_bytes(profile_.curve, m.field(0)));
    dh_.reset();
}

std::optional<Bytes> Webserver::on_client_random(std::uint64_t conn, const NonceWire& random, std::uint64_t tick,
                                                 Prg& prg, OpTally* tally) {
    if (!enrolled()) return std::nullopt;
    const DecodeResult d = codec_.decode(random, enc_.sk, tally);
    if (!d) return std::nullopt;

    const BitLayout& layout = profile_.layout;
    const DerivedKeys k = kdf(k_bc_, kServerDcpLabel, profile_.key_bytes);
    const Bytes inner = joined({id_bytes(layout, d->id.value), MacTag::from_value(d->tag.value, layout.m_t).bytes});
    const Bytes c_bc = sym_encrypt(k.enc, inner, prg);
    Bytes nonce_b = prg.bytes(kNonceBytes);
    const Bytes b = to_bytes(identity_);
    const Bytes auth = hmac_sha256(k.mac, joined({b, c_bc, nonce_b}));
    pending_[nonce_b] = Pending{conn, tick};
    return Message{MsgType::DistressForward, {b, c_bc, nonce_b}, auth}.encode();
}

void Webserver::on_reply(std::span<const std::uint8_t> frame, std::uint64_t tick) {
    expire(tick);
    Message m;
    try {
        m = Message::decode(frame);
    } catch (const Error&) {
        throw Rejected(RejectReason::Malformed);
    }
    if (m.type != MsgType::DistressReply || !enrolled()) throw Rejected(RejectReason::Malformed);
    const DerivedKeys k = kdf(k_bc_, kServerDcpLabel, profile_.key_bytes);
    const Bytes& c_cb = m.fields[0];
    const Bytes& s_ac = m.fields[1];
    const Bytes& nonce_c = m.fields[2];
    const auto verifies = [&](const Bytes& nonce_b) {
        return ct_equal(hmac_sha256(k.mac, joined({c_cb, s_ac, nonce_b, nonce_c})), m.auth);
    };

    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (!verifies(it->first)) continue;
        std::string instruction;
        try {
            instruction = to_text(sym_decrypt(k.enc, c_cb));
        } catch (const Error&) {
            throw Rejected(RejectReason::Malformed);
        }
        if (s_ac.size() != (kConfirmationBits + 7) / 8) throw Rejected(RejectReason::Malformed);
        ready_[it->second.conn] = {instruction, MacTag{s_ac, kConfirmationBits}};
        retired_.insert(it->first);
        pending_.erase(it);
        return;
    }
    for (const auto& old : retired_) {
        if (verifies(old)) throw Rejected(RejectReason::StaleNonce);
    }
    throw Rejected(RejectReason::BadMac);
}

PageEmbed Webserver::page_for(std::uint64_t conn, Prg& prg) {
    auto node = ready_.extract(conn);
    if (node.empty()) return PageEmbed::plain(prg);
    return PageEmbed::with_confirmation(node.mapped().first, node.mapped().second, prg);
}

std::size_t Webserver::expire(std::uint64_t tick) {
    std::size_t n = 0;
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (tick >= it->second.tick && tick - it->second.tick > config_.pending_timeout) {
            retired_.insert(it->first);
            it = pending_.erase(it);
            ++n;
        } else {
            ++it;
        }
    }
    return n;
}

std::string Webserver::to_json() const {
    json j = {
        {"identity", identity_},
        {"certificate", json::parse(cert_to_json(profile_, cert_))},
        {"signing_key", json::parse(sig_key_to_json(profile_, sig_key_))},
        {"enc_sk", to_string(enc_.sk)},
        {"k_bc", k_bc_.to_hex()},
        {"pending_timeout", config_.pending_timeout},
    };
    return j.dump(2) + "\n";
}

Webserver Webserver::from_json(const Profile& profile, const std::string& text) {
    try {
        const json j = json::parse(text);
        Webserver w(profile, j.at("identity").get<std::string>(), cert_from_json(profile, j.at("certificate").dump()),
                    sig_key_from_json(profile, j.at("signing_key").dump()),
                    WebserverConfig{j.at("pending_timeout").get<std::uint64_t>()});
        const u128 sk = parse_u128(j.at("enc_sk").get<std::string>());
        if (sk != 0) w.enc_ = w.codec_.scheme().keypair_from_secret(sk);
        w.k_bc_ = SharedSeed::from_hex(j.at("k_bc").get<std::string>());
        return w;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, e.what());
    }
}

}  // namespace distress
