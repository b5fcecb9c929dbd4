#include <algorithm>
#include <fstream>
#include <sstream>

#include "distress/protocol.hpp"
#include "json.hpp"

namespace distress {

namespace {

using nlohmann::json;

constexpr const char* kStoreFormat = "distress-store/1";

Message decode_as(std::span<const std::uint8_t> frame, MsgType type) {
    Message m = Message::decode(frame);
    if (m.type != type) throw Error(ErrorCode::MalformedMessage, std::string("expected ") + to_string(type));
    return m;
}

std::string point_hex(const Profile& p, const Point& pt) { return to_hex(point_bytes(p.curve, pt)); }

Point point_from_hex(const Profile& p, const json& j) {
    return point_from_bytes(p.curve, from_hex(j.get<std::string>()));
}

}  // namespace

Dcp::Dcp(Profile profile, Point root_vk, DcpConfig config)
    : profile_(std::move(profile)), root_vk_(root_vk), config_(config) {}

Bytes Dcp::reject(RejectReason reason) const {
    Message m{MsgType::EnrolReject, {to_bytes(to_string(reason))}, {}};
    return m.encode();
}

u128 Dcp::fresh_id(Prg& prg) const {
    const unsigned m_i = profile_.layout.m_i;
    if (m_i < 64 && users_.size() >= (std::uint64_t{1} << m_i)) throw Rejected(RejectReason::IdExhausted);
    for (;;) {
        const u128 id = prg.bits(m_i);
        if (user_by_id(id) == nullptr) return id;
    }
}

const UserRecord* Dcp::user_by_id(u128 id) const {
    for (const auto& [usr, rec] : users_) {
        if (rec.id == id) return &rec;
    }
    return nullptr;
}

Bytes Dcp::on_server_enrol(std::span<const std::uint8_t> frame, Prg& prg) {
    std::lock_guard lock(mu_);
    try {
        const Message m = decode_as(frame, MsgType::ServerEnrolRequest);
        const std::string identity = m.text(1);
        Certificate cert;
        try {
            cert = cert_from_bytes(profile_, m.field(2));
        } catch (const Error&) {
            throw Rejected(RejectReason::CertInvalid, "unparseable certificate");
        }
        if (cert.subject != identity || !cert_verify(profile_, root_vk_, cert)) {
            throw Rejected(RejectReason::CertInvalid);
        }
        Signature sig;
        try {
            sig = Signature::from_bytes(m.auth);
        } catch (const Error&) {
            throw Rejected(RejectReason::SigInvalid, "unparseable signature");
        }
        if (!sig_verify(profile_, cert.subject_vk, joined({m.field(0), m.field(1), m.field(3)}), sig)) {
            throw Rejected(RejectReason::SigInvalid);
        }
        if (servers_.contains(identity)) throw Rejected(RejectReason::Duplicate, identity);

        const Point g_b = point_from_bytes(profile_.curve, m.field(0));
        const Point pk = point_from_bytes(profile_.curve, m.field(3));
        if (pk.infinity) throw Rejected(RejectReason::Malformed, "encryption key at infinity");
        const DhKeyShare c = dh_keygen(profile_, prg);
        SharedSeed seed = dh_combine(profile_, c, g_b);
        servers_[identity] = ServerRecord{identity, pk, std::move(seed)};
        return Message{MsgType::ServerEnrolResponse, {point_bytes(profile_.curve, c.share)}, {}}.encode();
    } catch (const Rejected& r) {
        return reject(r.reason());
    } catch (const Error&) {
        return reject(RejectReason::Malformed);
    }
}

Bytes Dcp::on_user_hello(std::uint64_t session, std::span<const std::uint8_t> frame, Prg&) {
    std::lock_guard lock(mu_);
    pending_.erase(session);
    try {
        const Message m = decode_as(frame, MsgType::UserEnrolHello);
        PendingUser p;
        p.usr = m.text(0);
        p.pwd = m.text(1);
        p.info = UserInfo::decode(m.field(2));
        p.g_a = point_from_bytes(profile_.curve, m.field(3));
        if (m.field(4).size() != 8) throw Rejected(RejectReason::Malformed, "sqn must be 8 bytes");
        p.sqn = static_cast<std::uint64_t>(be_value(m.field(4)));
        if (p.usr.empty()) throw Rejected(RejectReason::Malformed, "empty username");
        if (auto it = users_.find(p.usr); it != users_.end()) {
            if (!password_verify(p.pwd, it->second.pwd)) throw Rejected(RejectReason::BadPassword);
            p.existing_id = it->second.id;
        } else {
            const unsigned m_i = profile_.layout.m_i;
            if (m_i < 64 && users_.size() >= (std::uint64_t{1} << m_i)) throw Rejected(RejectReason::IdExhausted);
        }
        pending_[session] = std::move(p);
        Message list{MsgType::WebsiteList, {}, {}};
        for (const auto& [name, rec] : servers_) list.fields.push_back(to_bytes(name));
        return list.encode();
    } catch (const Rejected& r) {
        return reject(r.reason());
    } catch (const Error&) {
        return reject(RejectReason::Malformed);
    }
}

Bytes Dcp::on_website_selection(std::uint64_t session, std::span<const std::uint8_t> frame, Prg& prg) {
    std::lock_guard lock(mu_);
    auto node = pending_.extract(session);
    try {
        if (node.empty()) throw Rejected(RejectReason::Malformed, "no enrolment in progress");
        PendingUser& p = node.mapped();
        const Message m = decode_as(frame, MsgType::WebsiteSelection);
        if (m.fields.empty()) throw Rejected(RejectReason::Malformed, "empty website selection");
        std::vector<std::string> chosen;
        FieldWriter keys;
        for (const auto& f : m.fields) {
            const std::string site = to_text(f);
            const auto it = servers_.find(site);
            if (it == servers_.end()) throw Rejected(RejectReason::UnknownWebsite, site);
            if (std::find(chosen.begin(), chosen.end(), site) != chosen.end()) continue;
            chosen.push_back(site);
            keys.add(site);
            keys.add(point_bytes(profile_.curve, it->second.pk_enc));
        }
        const DhKeyShare c = dh_keygen(profile_, prg);
        SharedSeed seed = dh_combine(profile_, c, p.g_a);

        UserRecord rec;
        if (p.existing_id) {
            rec = users_.at(p.usr);
        } else {
            rec.usr = p.usr;
            rec.pwd = password_hash(p.pwd, prg, config_.pbkdf2_iterations);
            rec.id = fresh_id(prg);
        }
        rec.info = p.info;
        rec.sqn = p.sqn;
        rec.k_ac = std::move(seed);
        rec.websites = chosen;
        const u128 id = rec.id;
        users_[p.usr] = std::move(rec);
        return Message{MsgType::UserEnrolComplete,
                       {id_bytes(profile_.layout, id), keys.take(), point_bytes(profile_.curve, c.share)},
                       {}}
            .encode();
    } catch (const Rejected& r) {
        return reject(r.reason());
    } catch (const Error&) {
        return reject(RejectReason::Malformed);
    }
}

ForwardOutcome Dcp::on_forward(std::span<const std::uint8_t> frame, std::uint64_t tick, Prg& prg) {
    std::lock_guard lock(mu_);
    ForwardOutcome out;
    const auto fail = [&](RejectReason r) {
        out.reason = r;
        return out;
    };
    Message m;
    try {
        m = decode_as(frame, MsgType::DistressForward);
    } catch (const Error&) {
        return fail(RejectReason::Malformed);
    }
    const std::string server = to_text(m.fields[0]);
    const auto sit = servers_.find(server);
    if (sit == servers_.end()) return fail(RejectReason::UnknownServer);
    const DerivedKeys k_bc = kdf(sit->second.k_bc, kServerDcpLabel, profile_.key_bytes);
    const Bytes& c_bc = m.fields[1];
    const Bytes& nonce_b = m.fields[2];
    if (!ct_equal(hmac_sha256(k_bc.mac, joined({m.fields[0], c_bc, nonce_b})), m.auth)) {
        return fail(RejectReason::BadOuterMac);
    }

    const BitLayout& layout = profile_.layout;
    Bytes id_field;
    MacTag tag;
    try {
        const Bytes inner = sym_decrypt(k_bc.enc, c_bc);
        FieldReader r(inner);
        id_field = r.next();
        tag.bytes = r.next();
        r.expect_done();
    } catch (const Error&) {
        return fail(RejectReason::Malformed);
    }
    tag.bits = layout.m_t;
    if (id_field.size() != (layout.m_i + 7) / 8 || tag.bytes.size() != (layout.m_t + 7) / 8) {
        return fail(RejectReason::Malformed);
    }
    const u128 id = be_value(id_field);

    UserRecord* user = nullptr;
    for (auto& [usr, rec] : users_) {
        if (rec.id == id) user = &rec;
    }
    if (user == nullptr) return fail(RejectReason::UnknownUser);

    const DerivedKeys k_ac = kdf(user->k_ac, kUserDcpLabel, profile_.key_bytes);
    std::optional<std::uint64_t> accepted;
    for (unsigned i = 0; i <= config_.n_max && !accepted; ++i) {
        FieldWriter w;
        w.add(id_field);
        w.add_u64(user->sqn + i);
        if (mac_verify(k_ac.mac, w.bytes(), tag)) accepted = user->sqn + i;
    }
    if (!accepted) return fail(RejectReason::BadTag);

    user->sqn = *accepted + 1;
    const MacTag s_ac = confirmation_tag(k_ac, *accepted);
    const Bytes c_cb = sym_encrypt(k_bc.enc, to_bytes(user->info.instruction), prg);
    const Bytes nonce_c = prg.bytes(kNonceBytes);
    const Bytes auth = hmac_sha256(k_bc.mac, joined({c_cb, s_ac.bytes, nonce_b, nonce_c}));
    out.accepted = true;
    out.reply = Message{MsgType::DistressReply, {c_cb, s_ac.bytes, nonce_c}, auth}.encode();

    const DistressEvent ev{id, *accepted, tick, server};
    events_.push_back(ev);
    if (event_log_) {
        std::ofstream log(*event_log_, std::ios::app);
        log << ev.to_json_line() << '\n';
    }
    return out;
}

std::vector<DistressEvent> Dcp::events() const {
    std::lock_guard lock(mu_);
    return events_;
}

void Dcp::set_event_log(std::filesystem::path path) {
    std::lock_guard lock(mu_);
    event_log_ = std::move(path);
}

std::optional<ServerRecord> Dcp::server(const std::string& identity) const {
    std::lock_guard lock(mu_);
    const auto it = servers_.find(identity);
    if (it == servers_.end()) return std::nullopt;
    return it->second;
}

std::optional<UserRecord> Dcp::user(const std::string& usr) const {
    std::lock_guard lock(mu_);
    const auto it = users_.find(usr);
    if (it == users_.end()) return std::nullopt;
    return it->second;
}

std::size_t Dcp::user_count() const {
    std::lock_guard lock(mu_);
    return users_.size();
}

std::size_t Dcp::server_count() const {
    std::lock_guard lock(mu_);
    return servers_.size();
}

std::string Dcp::store_json() const {
    std::lock_guard lock(mu_);
    json servers = json::object();
    for (const auto& [name, rec] : servers_) {
        servers[name] = {{"pk_enc", point_hex(profile_, rec.pk_enc)}, {"k_bc", rec.k_bc.to_hex()}};
    }
    json users = json::object();
    for (const auto& [usr, rec] : users_) {
        users[usr] = {
            {"pwd", {{"salt", to_hex(rec.pwd.salt)}, {"hash", to_hex(rec.pwd.hash)}, {"iterations", rec.pwd.iterations}}},
            {"details", rec.info.details},
            {"instruction", rec.info.instruction},
            {"id", to_string(rec.id)},
            {"sqn", std::to_string(rec.sqn)},
            {"k_ac", rec.k_ac.to_hex()},
            {"websites", rec.websites},
        };
    }
    json body = {{"profile", profile_.name}, {"servers", servers}, {"users", users}};
    const std::string dumped = body.dump();
    json doc = {{"format", kStoreFormat}, {"body", body}, {"digest", to_hex(sha256(to_bytes(dumped)))}};
    return doc.dump(2) + "\n";
}

void Dcp::save(const std::filesystem::path& path) const {
    const std::string text = store_json();
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::StoreCorrupt, "cannot write " + tmp.string());
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

void Dcp::load_store_json(const std::string& text) {
    std::map<std::string, ServerRecord> servers;
    std::map<std::string, UserRecord> users;
    try {
        const json doc = json::parse(text);
        if (doc.at("format").get<std::string>() != kStoreFormat) throw Error(ErrorCode::StoreCorrupt, "unknown format");
        const json& body = doc.at("body");
        if (to_hex(sha256(to_bytes(body.dump()))) != doc.at("digest").get<std::string>()) {
            throw Error(ErrorCode::StoreCorrupt, "digest mismatch");
        }
        if (body.at("profile").get<std::string>() != profile_.name) {
            throw Error(ErrorCode::StoreCorrupt, "store belongs to another profile");
        }
        for (const auto& [name, s] : body.at("servers").items()) {
            ServerRecord rec{name, point_from_hex(profile_, s.at("pk_enc")),
                             SharedSeed::from_hex(s.at("k_bc").get<std::string>())};
            if (rec.pk_enc.infinity || rec.k_bc.empty()) throw Error(ErrorCode::StoreCorrupt, "bad server " + name);
            servers.emplace(name, std::move(rec));
        }
        std::set<u128> ids;
        for (const auto& [usr, u] : body.at("users").items()) {
            UserRecord rec;
            rec.usr = usr;
            const json& pw = u.at("pwd");
            rec.pwd = {from_hex(pw.at("salt").get<std::string>()), from_hex(pw.at("hash").get<std::string>()),
                       pw.at("iterations").get<unsigned>()};
            rec.info = {u.at("details").get<std::string>(), u.at("instruction").get<std::string>()};
            rec.id = parse_u128(u.at("id").get<std::string>());
            rec.sqn = static_cast<std::uint64_t>(parse_u128(u.at("sqn").get<std::string>()));
            rec.k_ac = SharedSeed::from_hex(u.at("k_ac").get<std::string>());
            rec.websites = u.at("websites").get<std::vector<std::string>>();
            if (rec.id > low_mask(profile_.layout.m_i) || !ids.insert(rec.id).second || rec.k_ac.empty()) {
                throw Error(ErrorCode::StoreCorrupt, "bad user " + usr);
            }
            for (const auto& site : rec.websites) {
                if (!servers.contains(site)) throw Error(ErrorCode::StoreCorrupt, "user " + usr + " names " + site);
            }
            users.emplace(usr, std::move(rec));
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StoreCorrupt) throw;
        throw Error(ErrorCode::StoreCorrupt, e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorCode::StoreCorrupt, e.what());
    }
    std::lock_guard lock(mu_);
    servers_ = std::move(servers);
    users_ = std::move(users);
    pending_.clear();
}

void Dcp::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::StoreCorrupt, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    load_store_json(ss.str());
}

}  // namespace distress
