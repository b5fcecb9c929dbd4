#include "distress/harness.hpp"
#include "json.hpp"

namespace distress {

void SimNetwork::send(const std::string& from, const std::string& to, std::string kind, Bytes payload,
                      std::uint64_t tick) {
    Frame f{seq_++, tick, from, to, std::move(kind), std::move(payload)};
    for (const auto& tap : taps_) tap(f);
    links_[{from, to}].push_back(std::move(f));
}

Frame SimNetwork::receive(const std::string& from, const std::string& to) {
    auto it = links_.find({from, to});
    if (it == links_.end() || it->second.empty()) {
        throw Error(ErrorCode::ScriptError, "nothing in flight from " + from + " to " + to);
    }
    Frame f = std::move(it->second.front());
    it->second.pop_front();
    return f;
}

std::size_t SimNetwork::in_flight() const {
    std::size_t n = 0;
    for (const auto& [link, q] : links_) n += q.size();
    return n;
}

SimNetwork::Tap TranscriptTap::tap() {
    return [this](const Frame& f) {
        nlohmann::ordered_json j;
        j["seq"] = f.seq;
        j["tick"] = f.tick;
        j["from"] = f.from;
        j["to"] = f.to;
        j["kind"] = f.kind;
        j["hex"] = to_hex(f.payload);
        lines_.push_back(j.dump());
    };
}

std::string TranscriptTap::ndjson() const {
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
}

// ---------------------------------------------------------------- world

struct World::Connection {
    std::uint64_t id;
    SecureChannel client;
    SecureChannel server;
    std::optional<Bytes> forward;
};

World::World(Profile profile, std::uint64_t seed, WorldConfig config)
    : profile_(std::move(profile)), prg_(seed), config_(config) {
    root_ = sig_keygen(profile_, prg_);
    dcp_key_ = sig_keygen(profile_, prg_);
    dcp_cert_ = cert_issue(profile_, root_, "dcp", dcp_key_.vk);
    dcp_ = std::make_unique<Dcp>(profile_, root_.vk, config_.dcp);
}

Webserver& World::server(const std::string& name) {
    const auto it = servers_.find(name);
    if (it == servers_.end()) throw Error(ErrorCode::ScriptError, "unknown server " + name);
    return *it->second;
}

User& World::user(const std::string& name) {
    const auto it = users_.find(name);
    if (it == users_.end()) throw Error(ErrorCode::ScriptError, "unknown user " + name);
    return *it->second;
}

std::pair<SecureChannel, SecureChannel> World::dcp_session(const std::string& client) {
    SessionClient sc(profile_, root_.vk, "dcp");
    net_.send(client, "dcp", "hello", sc.hello(prg_nonce(prg_), prg_).encode(), tick_);
    SessionAccept acc =
        session_accept(profile_, dcp_cert_, dcp_key_, HelloFrame::decode(net_.receive(client, "dcp").payload), prg_);
    net_.send("dcp", client, "server_hello", std::move(acc.server_hello), tick_);
    SecureChannel mine = sc.finish(net_.receive("dcp", client).payload);
    return {std::move(mine), std::move(acc.channel)};
}

Bytes World::rpc(const std::string& client, SecureChannel& client_ch, SecureChannel& dcp_ch, const Bytes& request,
                 const std::function<Bytes(const Bytes&)>& handler) {
    net_.send(client, "dcp", "record", client_ch.seal(request, prg_), tick_);
    const Bytes response = handler(dcp_ch.open(net_.receive(client, "dcp").payload));
    net_.send("dcp", client, "record", dcp_ch.seal(response, prg_), tick_);
    return client_ch.open(net_.receive("dcp", client).payload);
}

Webserver& World::enroll_server(const std::string& name) {
    ++tick_;
    if (name == "dcp" || name.rfind("browser", 0) == 0) throw Error(ErrorCode::ScriptError, "reserved name " + name);
    const SigKeyPair key = sig_keygen(profile_, prg_);
    auto w = std::make_unique<Webserver>(profile_, name, cert_issue(profile_, root_, name, key.vk), key,
                                         config_.server);
    auto [mine, theirs] = dcp_session(name);
    const Bytes resp =
        rpc(name, mine, theirs, w->begin_enrolment(prg_), [&](const Bytes& req) { return dcp_->on_server_enrol(req, prg_); });
    w->finish_enrolment(resp);
    Webserver& ref = *w;
    servers_[name] = std::move(w);
    return ref;
}

User& World::enroll_user(const std::string& name, const std::vector<std::string>& sites,
                         const std::string& instruction) {
    ++tick_;
    if (name == "dcp" || servers_.contains(name)) throw Error(ErrorCode::ScriptError, "name clash " + name);
    auto it = users_.find(name);
    if (it == users_.end()) {
        const UserInfo info{"responder details for " + name, instruction.empty() ? "footer:" + name : instruction};
        it = users_.emplace(name, std::make_unique<User>(profile_, name, "pw-" + name, info)).first;
    }
    User& u = *it->second;
    const std::uint64_t session = next_conn_++;
    auto [mine, theirs] = dcp_session(name);
    const Bytes list = rpc(name, mine, theirs, u.enrol_hello(prg_),
                           [&](const Bytes& req) { return dcp_->on_user_hello(session, req, prg_); });
    const Bytes sel = u.select_websites(list, sites);
    const Bytes done = rpc(name, mine, theirs, sel,
                           [&](const Bytes& req) { return dcp_->on_website_selection(session, req, prg_); });
    u.finish_enrolment(done);
    return u;
}

World::Connection World::connect(const std::string& client, Webserver& w, const NonceWire& random) {
    const std::uint64_t conn = next_conn_++;
    SessionClient sc(profile_, root_.vk, w.identity());
    net_.send(client, w.identity(), "hello", sc.hello(random, prg_).encode(), tick_);
    const HelloFrame hello = HelloFrame::decode(net_.receive(client, w.identity()).payload);
    // distress detection runs beside the handshake and never alters it
    std::optional<Bytes> forward = w.on_client_random(conn, hello.client_random, tick_, prg_);
    SessionAccept acc = session_accept(profile_, w.certificate(), w.signing_key(), hello, prg_);
    net_.send(w.identity(), client, "server_hello", std::move(acc.server_hello), tick_);
    SecureChannel mine = sc.finish(net_.receive(w.identity(), client).payload);
    return Connection{conn, std::move(mine), std::move(acc.channel), std::move(forward)};
}

void World::relay(Webserver& w, const Bytes& forward, DistressResult& out) {
    out.forwarded = true;
    net_.send(w.identity(), "dcp", "forward", forward, tick_);
    const ForwardOutcome r = dcp_->on_forward(net_.receive(w.identity(), "dcp").payload, tick_, prg_);
    if (!r.accepted) {
        out.dcp_reject = r.reason;
        return;
    }
    net_.send("dcp", w.identity(), "reply", r.reply, tick_);
    try {
        w.on_reply(net_.receive("dcp", w.identity()).payload, tick_);
    } catch (const Rejected& e) {
        out.server_reject = e.reason();
    }
}

std::optional<PageEmbed> World::fetch_page(const std::string& client, Webserver& w, Connection& c) {
    net_.send(client, w.identity(), "record", c.client.seal(to_bytes("GET /"), prg_), tick_);
    (void)c.server.open(net_.receive(client, w.identity()).payload);
    const PageEmbed page = w.page_for(c.id, prg_);
    net_.send(w.identity(), client, "record", c.server.seal(page.encode(), prg_), tick_);
    try {
        return PageEmbed::decode(c.client.open(net_.receive(w.identity(), client).payload));
    } catch (const Error&) {
        return std::nullopt;
    }
}

bool World::normal_hello(const std::string& server_name) {
    ++tick_;
    Webserver& w = server(server_name);
    const std::string client = "browser";
    Connection c = connect(client, w, prg_nonce(prg_));
    DistressResult r;
    if (c.forward) relay(w, *c.forward, r);
    (void)fetch_page(client, w, c);
    return r.forwarded;
}

DistressResult World::distress(const std::string& user_name, const std::string& server_name) {
    ++tick_;
    User& u = user(user_name);
    Webserver& w = server(server_name);
    const NonceWire nonce = u.make_distress_nonce(server_name, prg_);
    Connection c = connect(user_name, w, nonce);
    DistressResult r;
    if (c.forward) relay(w, *c.forward, r);
    const auto page = fetch_page(user_name, w, c);
    r.confirmed = page && u.verify_confirmation(*page);
    return r;
}

void World::lose_distress(const std::string& user_name, const std::string& server_name) {
    ++tick_;
    (void)server(server_name);
    (void)user(user_name).make_distress_nonce(server_name, prg_);
}

}  // namespace distress
