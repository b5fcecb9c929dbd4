#include <algorithm>

#include "distress/protocol.hpp"
#include "json.hpp"

namespace distress {

namespace {

using nlohmann::json;

Message expect(std::span<const std::uint8_t> frame, MsgType type) {
    Message m = Message::decode(frame);
    if (m.type == MsgType::EnrolReject) {
        const auto reason = reject_reason_from_string(m.text(0));
        if (!reason) throw Error(ErrorCode::MalformedMessage, "unknown reject reason");
        throw Rejected(*reason);
    }
    if (m.type != type) throw Error(ErrorCode::MalformedMessage, std::string("expected ") + to_string(type));
    return m;
}

}  // namespace

User::User(Profile profile, std::string usr, std::string pwd, UserInfo info)
    : profile_(std::move(profile)), usr_(std::move(usr)), pwd_(std::move(pwd)), info_(std::move(info)) {}

const UserCredentials& User::credentials() const {
    if (!creds_) throw Error(ErrorCode::ContractViolation, "user not enrolled");
    return *creds_;
}

Bytes User::enrol_hello(Prg& prg) {
    dh_ = dh_keygen(profile_, prg);
    // 32-bit start leaves the counter room to grow
    chosen_sqn_ = static_cast<std::uint64_t>(prg.bits(32));
    return Message{MsgType::UserEnrolHello,
                   {to_bytes(usr_), to_bytes(pwd_), info_.encode(), point_bytes(profile_.curve, dh_->share),
                    be_bytes(chosen_sqn_, 8)},
                   {}}
        .encode();
}

Bytes User::select_websites(std::span<const std::uint8_t> list_frame, const std::vector<std::string>& wanted) {
    const Message list = expect(list_frame, MsgType::WebsiteList);
    selected_.clear();
    if (wanted.empty()) {
        for (const auto& f : list.fields) selected_.push_back(to_text(f));
    } else {
        selected_ = wanted;
    }
    Message sel{MsgType::WebsiteSelection, {}, {}};
    for (const auto& s : selected_) sel.fields.push_back(to_bytes(s));
    return sel.encode();
}

void User::finish_enrolment(std::span<const std::uint8_t> frame) {
    const Message m = expect(frame, MsgType::UserEnrolComplete);
    if (!dh_) throw Error(ErrorCode::MalformedMessage, "no enrolment in progress");
    const BitLayout& layout = profile_.layout;
    if (m.field(0).size() != (layout.m_i + 7) / 8) throw Error(ErrorCode::MalformedMessage, "bad id width");
    UserCredentials c;
    c.id = be_value(m.field(0));
    if (c.id > low_mask(layout.m_i)) throw Error(ErrorCode::MalformedMessage, "id wider than m_i");
    FieldReader r(m.field(1));
    while (!r.done()) {
        SiteKey site;
        site.identity = r.next_text();
        site.pk_enc = point_from_bytes(profile_.curve, r.next());
        if (std::find(selected_.begin(), selected_.end(), site.identity) == selected_.end()) {
            throw Error(ErrorCode::MalformedMessage, "key for unselected site " + site.identity);
        }
        c.websites.push_back(std::move(site));
    }
    c.k_ac = dh_combine(profile_, *dh_, point_from_bytes(profile_.curve, m.field(2)));
    c.sqn = chosen_sqn_;
    creds_ = std::move(c);
    last_sqn_.reset();
    dh_.reset();
}

NonceWire User::make_distress_nonce(const std::string& site, Prg& prg) {
    const UserCredentials& c = credentials();
    const auto it = std::find_if(c.websites.begin(), c.websites.end(),
                                 [&](const SiteKey& s) { return s.identity == site; });
    if (it == c.websites.end()) throw Rejected(RejectReason::UnknownWebsite, site);
    const BitLayout& layout = profile_.layout;
    const std::uint64_t sqn = creds_->sqn++;
    last_sqn_ = sqn;
    const MacTag tag = distress_tag(kdf(c.k_ac, kUserDcpLabel, profile_.key_bytes), layout, c.id, sqn);
    const DistressPayload payload{{c.id, layout.m_i}, {tag.value(), layout.m_t}};
    return profile_.codec().encode(payload, it->pk_enc, prg);
}

bool User::verify_confirmation(const PageEmbed& page) const noexcept {
    try {
        if (!creds_ || !last_sqn_) return false;
        const auto s_ac = page.extract(info_.instruction);
        if (!s_ac) return false;
        FieldWriter w;
        w.add_u64(*last_sqn_);
        return mac_verify(kdf(creds_->k_ac, kUserDcpLabel, profile_.key_bytes).mac, w.bytes(), *s_ac);
    } catch (...) {
        return false;
    }
}

std::string User::to_json() const {
    json j = {{"usr", usr_}, {"pwd", pwd_}, {"details", info_.details}, {"instruction", info_.instruction}};
    if (creds_) {
        json sites = json::array();
        for (const auto& s : creds_->websites) {
            sites.push_back({{"identity", s.identity}, {"pk_enc", to_hex(point_bytes(profile_.curve, s.pk_enc))}});
        }
        j["credentials"] = {{"id", to_string(creds_->id)},
                            {"sqn", std::to_string(creds_->sqn)},
                            {"k_ac", creds_->k_ac.to_hex()},
                            {"websites", sites}};
    }
    j["last_sqn"] = last_sqn_ ? json(std::to_string(*last_sqn_)) : json(nullptr);
    return j.dump(2) + "\n";
}

User User::from_json(const Profile& profile, const std::string& text) {
    try {
        const json j = json::parse(text);
        User u(profile, j.at("usr").get<std::string>(), j.at("pwd").get<std::string>(),
               UserInfo{j.at("details").get<std::string>(), j.at("instruction").get<std::string>()});
        if (j.contains("credentials")) {
            const json& c = j.at("credentials");
            UserCredentials creds;
            creds.id = parse_u128(c.at("id").get<std::string>());
            creds.sqn = static_cast<std::uint64_t>(parse_u128(c.at("sqn").get<std::string>()));
            creds.k_ac = SharedSeed::from_hex(c.at("k_ac").get<std::string>());
            for (const auto& s : c.at("websites")) {
                creds.websites.push_back({s.at("identity").get<std::string>(),
                                          point_from_bytes(profile.curve, from_hex(s.at("pk_enc").get<std::string>()))});
            }
            u.creds_ = std::move(creds);
        }
        if (j.contains("last_sqn") && !j.at("last_sqn").is_null()) {
            u.last_sqn_ = static_cast<std::uint64_t>(parse_u128(j.at("last_sqn").get<std::string>()));
        }
        return u;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, e.what());
    }
}

}  // namespace distress
