#include <algorithm>

#include "distress/protocol.hpp"
#include "json.hpp"

namespace distress {

namespace {

constexpr RejectReason kAllReasons[] = {
    RejectReason::CertInvalid,  RejectReason::SigInvalid,    RejectReason::Duplicate,   RejectReason::UnknownWebsite,
    RejectReason::BadPassword,  RejectReason::IdExhausted,   RejectReason::UnknownServer, RejectReason::BadOuterMac,
    RejectReason::UnknownUser,  RejectReason::BadTag,        RejectReason::BadMac,      RejectReason::StaleNonce,
    RejectReason::Malformed,
};

std::size_t page_offset(const std::string& instruction) {
    const Bytes h = sha256(to_bytes(instruction));
    const std::size_t width = (kConfirmationBits + 7) / 8;
    return ((static_cast<std::size_t>(h[0]) << 8) | h[1]) % (PageEmbed::kSize - width + 1);
}

}  // namespace

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::CertInvalid: return "CertInvalid";
        case RejectReason::SigInvalid: return "SigInvalid";
        case RejectReason::Duplicate: return "Duplicate";
        case RejectReason::UnknownWebsite: return "UnknownWebsite";
        case RejectReason::BadPassword: return "BadPassword";
        case RejectReason::IdExhausted: return "IdExhausted";
        case RejectReason::UnknownServer: return "UnknownServer";
        case RejectReason::BadOuterMac: return "BadOuterMac";
        case RejectReason::UnknownUser: return "UnknownUser";
        case RejectReason::BadTag: return "BadTag";
        case RejectReason::BadMac: return "BadMac";
        case RejectReason::StaleNonce: return "StaleNonce";
        case RejectReason::Malformed: return "Malformed";
    }
    return "?";
}

std::optional<RejectReason> reject_reason_from_string(std::string_view name) {
    for (RejectReason r : kAllReasons) {
        if (name == to_string(r)) return r;
    }
    return std::nullopt;
}

Bytes id_bytes(const BitLayout& layout, u128 id) { return be_bytes(id, (layout.m_i + 7) / 8); }

MacTag distress_tag(const DerivedKeys& k_ac, const BitLayout& layout, u128 id, std::uint64_t sqn) {
    FieldWriter w;
    w.add(id_bytes(layout, id));
    w.add_u64(sqn);
    return mac_sign(k_ac.mac, w.bytes(), layout.m_t);
}

MacTag confirmation_tag(const DerivedKeys& k_ac, std::uint64_t sqn) {
    FieldWriter w;
    w.add_u64(sqn);
    return mac_sign(k_ac.mac, w.bytes(), kConfirmationBits);
}

Bytes UserInfo::encode() const {
    FieldWriter w;
    w.add(details);
    w.add(instruction);
    return w.take();
}

UserInfo UserInfo::decode(std::span<const std::uint8_t> data) {
    FieldReader r(data);
    UserInfo info;
    info.details = r.next_text();
    info.instruction = r.next_text();
    r.expect_done();
    if (info.instruction.empty()) throw Error(ErrorCode::MalformedMessage, "empty confirmation instruction");
    return info;
}

PageEmbed PageEmbed::with_confirmation(const std::string& instruction, const MacTag& s_ac, Prg& prg) {
    PageEmbed page = plain(prg);
    std::copy(s_ac.bytes.begin(), s_ac.bytes.end(), page.content.begin() + static_cast<std::ptrdiff_t>(page_offset(instruction)));
    return page;
}

PageEmbed PageEmbed::plain(Prg& prg) { return PageEmbed{prg.bytes(kSize)}; }

std::optional<MacTag> PageEmbed::extract(const std::string& instruction) const {
    if (content.size() != kSize) return std::nullopt;
    const std::size_t width = (kConfirmationBits + 7) / 8;
    const auto at = content.begin() + static_cast<std::ptrdiff_t>(page_offset(instruction));
    MacTag t;
    t.bits = kConfirmationBits;
    t.bytes.assign(at, at + static_cast<std::ptrdiff_t>(width));
    const unsigned spare = static_cast<unsigned>(width * 8 - kConfirmationBits);
    t.bytes.back() = static_cast<std::uint8_t>(t.bytes.back() & (0xff << spare));
    return t;
}

Bytes PageEmbed::encode() const {
    FieldWriter w;
    w.add(content);
    return w.take();
}

PageEmbed PageEmbed::decode(std::span<const std::uint8_t> data) {
    FieldReader r(data);
    PageEmbed p{r.next()};
    r.expect_done();
    return p;
}

std::string DistressEvent::to_json_line() const {
    nlohmann::ordered_json j;
    j["id"] = to_string(id);
    j["sqn"] = sqn;
    j["tick"] = tick;
    j["server"] = server;
    return j.dump();
}

DistressEvent DistressEvent::from_json_line(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        return {parse_u128(j.at("id").get<std::string>()), j.at("sqn").get<std::uint64_t>(),
                j.at("tick").get<std::uint64_t>(), j.at("server").get<std::string>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, e.what());
    }
}

}  // namespace distress
