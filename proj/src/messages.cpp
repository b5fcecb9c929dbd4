#include "distress/messages.hpp"

#include "distress/errors.hpp"

namespace distress {

namespace {

// Allowed field counts (excluding the authenticator); -1 = any.
int expected_fields(MsgType t) {
    switch (t) {
        case MsgType::ServerEnrolRequest: return 4;
        case MsgType::ServerEnrolResponse: return 1;
        case MsgType::UserEnrolHello: return 5;
        case MsgType::WebsiteList: return -1;
        case MsgType::WebsiteSelection: return -1;
        case MsgType::UserEnrolComplete: return 3;
        case MsgType::EnrolReject: return 1;
        case MsgType::DistressForward: return 3;
        case MsgType::DistressReply: return 3;
    }
    return -2;
}

}  // namespace

const char* to_string(MsgType type) {
    switch (type) {
        case MsgType::ServerEnrolRequest: return "ServerEnrolRequest";
        case MsgType::ServerEnrolResponse: return "ServerEnrolResponse";
        case MsgType::UserEnrolHello: return "UserEnrolHello";
        case MsgType::WebsiteList: return "WebsiteList";
        case MsgType::WebsiteSelection: return "WebsiteSelection";
        case MsgType::UserEnrolComplete: return "UserEnrolComplete";
        case MsgType::EnrolReject: return "EnrolReject";
        case MsgType::DistressForward: return "DistressForward";
        case MsgType::DistressReply: return "DistressReply";
    }
    return "?";
}

Bytes Message::encode() const {
    FieldWriter w;
    for (const auto& f : fields) w.add(f);
    w.add(auth);
    const Bytes body = w.take();
    Bytes out{static_cast<std::uint8_t>(type)};
    const Bytes len = be_bytes(body.size(), 4);
    out.insert(out.end(), len.begin(), len.end());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

Message Message::decode(std::span<const std::uint8_t> frame) {
    if (frame.size() < 5) throw Error(ErrorCode::MalformedMessage, "frame shorter than its header");
    Message m;
    m.type = static_cast<MsgType>(frame[0]);
    const int want = expected_fields(m.type);
    if (want == -2) throw Error(ErrorCode::MalformedMessage, "unknown message type " + std::to_string(frame[0]));
    const auto len = static_cast<std::size_t>(be_value(frame.subspan(1, 4)));
    if (len != frame.size() - 5) throw Error(ErrorCode::MalformedMessage, "body length mismatch");
    FieldReader r(frame.subspan(5));
    std::vector<Bytes> all;
    while (!r.done()) all.push_back(r.next());
    if (all.empty()) throw Error(ErrorCode::MalformedMessage, "missing authenticator slot");
    m.auth = std::move(all.back());
    all.pop_back();
    if (want >= 0 && all.size() != static_cast<std::size_t>(want)) {
        throw Error(ErrorCode::MalformedMessage, std::string(to_string(m.type)) + " has " +
                                                     std::to_string(all.size()) + " fields");
    }
    m.fields = std::move(all);
    return m;
}

const Bytes& Message::field(std::size_t i) const {
    if (i >= fields.size()) throw Error(ErrorCode::MalformedMessage, "missing field");
    return fields[i];
}

std::string Message::text(std::size_t i) const { return to_text(field(i)); }

Bytes joined(std::initializer_list<std::span<const std::uint8_t>> fields) {
    FieldWriter w;
    for (auto f : fields) w.add(f);
    return w.take();
}

}  // namespace distress
