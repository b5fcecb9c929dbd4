#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "distress/protocol.hpp"
#include "distress/session.hpp"

namespace distress {

// ---- simulated network ----

struct Frame {
    std::uint64_t seq = 0;
    std::uint64_t tick = 0;
    std::string from;
    std::string to;
    std::string kind;  // "hello", "server_hello", "record", "forward", "reply"
    Bytes payload;
};

// Named endpoints with per-link FIFO mailboxes. Taps see every frame at send
// time through a const reference and cannot alter delivery.
class SimNetwork {
public:
    using Tap = std::function<void(const Frame&)>;

    void add_tap(Tap tap) { taps_.push_back(std::move(tap)); }
    void send(const std::string& from, const std::string& to, std::string kind, Bytes payload, std::uint64_t tick);
    // Oldest undelivered frame on the link; throws ScriptError when empty.
    Frame receive(const std::string& from, const std::string& to);
    [[nodiscard]] std::size_t in_flight() const;
    [[nodiscard]] std::uint64_t frames_sent() const { return seq_; }

private:
    std::map<std::pair<std::string, std::string>, std::deque<Frame>> links_;
    std::vector<Tap> taps_;
    std::uint64_t seq_ = 0;
};

// Collects tapped frames as newline-delimited JSON with hex payloads.
class TranscriptTap {
public:
    SimNetwork::Tap tap();
    [[nodiscard]] const std::vector<std::string>& lines() const { return lines_; }
    [[nodiscard]] std::string ndjson() const;

private:
    std::vector<std::string> lines_;
};

// ---- full stack over the network ----

struct WorldConfig {
    DcpConfig dcp;
    WebserverConfig server;
};

struct DistressResult {
    bool forwarded = false;
    std::optional<RejectReason> dcp_reject;
    std::optional<RejectReason> server_reject;
    bool confirmed = false;
};

// Root CA, DCP and principals exchanging frames over a SimNetwork. Enrolment
// runs inside a secure session authenticated by the DCP certificate; every
// user-to-server connection opens with a HelloFrame whose client random is
// either a PRG nonce or a distress nonce.
class World {
public:
    World(Profile profile, std::uint64_t seed, WorldConfig config = {});

    [[nodiscard]] const Profile& profile() const { return profile_; }
    SimNetwork& network() { return net_; }
    Dcp& dcp() { return *dcp_; }
    [[nodiscard]] std::uint64_t tick() const { return tick_; }
    void advance(std::uint64_t ticks) { tick_ += ticks; }

    Webserver& enroll_server(const std::string& name);
    User& enroll_user(const std::string& name, const std::vector<std::string>& sites = {},
                      const std::string& instruction = {});
    [[nodiscard]] bool has_server(const std::string& name) const { return servers_.contains(name); }
    [[nodiscard]] bool has_user(const std::string& name) const { return users_.contains(name); }
    Webserver& server(const std::string& name);
    User& user(const std::string& name);

    // A connection with a PRG client random, from an anonymous browser.
    // Returns true when the webserver (falsely) forwarded it.
    bool normal_hello(const std::string& server);
    // Full distress: hello, forward, reply, https request, page, verification.
    DistressResult distress(const std::string& user, const std::string& server);
    // The user builds a distress nonce that never leaves the device.
    void lose_distress(const std::string& user, const std::string& server);

    // Root key, exposed so attack scripts can mint certificates.
    [[nodiscard]] const SigKeyPair& root() const { return root_; }

private:
    struct Connection;
    Connection connect(const std::string& client, Webserver& w, const NonceWire& random);
    void relay(Webserver& w, const Bytes& forward, DistressResult& out);
    std::optional<PageEmbed> fetch_page(const std::string& client, Webserver& w, Connection& c);
    Bytes rpc(const std::string& client, SecureChannel& client_ch, SecureChannel& dcp_ch, const Bytes& request,
              const std::function<Bytes(const Bytes&)>& handler);
    std::pair<SecureChannel, SecureChannel> dcp_session(const std::string& client);

    Profile profile_;
    Prg prg_;
    WorldConfig config_;
    SimNetwork net_;
    SigKeyPair root_;
    SigKeyPair dcp_key_;
    Certificate dcp_cert_;
    std::unique_ptr<Dcp> dcp_;
    std::map<std::string, std::unique_ptr<Webserver>> servers_;
    std::map<std::string, std::unique_ptr<User>> users_;
    std::uint64_t tick_ = 0;
    std::uint64_t next_conn_ = 1;
};

// ---- IndDistress game ----

struct GameTranscript {
    std::size_t n = 0;
    bool b = false;
    std::vector<NonceWire> nonces;
    std::vector<Bytes> x_list;
    std::optional<std::size_t> j;  // position of the encoded nonce when b = 1
    std::optional<bool> b_guess;
};

struct AdvantageEstimate {
    std::size_t n = 0;
    std::uint64_t trials = 0;
    double p_hat_b0 = 0;  // Pr(guess = 1 | b = 0)
    double p_hat_b1 = 0;  // Pr(guess = 1 | b = 1)
    double advantage = 0;
    double std_err = 0;
};

// b = 0: n PRG nonces. b = 1: n - 1 PRG nonces and one Encode(payload) at a
// uniform position j. The adversary-chosen x values are recorded only.
GameTranscript run_challenger(const NonceCodec& codec, const Point& pk, std::size_t n, bool b,
                              const DistressPayload& payload, Prg& prg, std::vector<Bytes> x_list = {});

// Both x slots below q and on the curve.
bool ec_structure(const Meceg& scheme, const NonceWire& wire);

// Coin flip when any nonce has ciphertext structure, else 0.
bool appendix_b_adversary(const Meceg& scheme, const GameTranscript& t, Prg& coin);

// trials / 2 games per challenger bit on a key drawn from `seed`. Trials are
// grouped into fixed chunks, each with its own derived stream, so the result
// does not depend on `threads`. Throws ContractViolation below 1000 trials.
AdvantageEstimate estimate_advantage(const Profile& profile, std::size_t n, std::uint64_t trials, std::uint64_t seed,
                                     unsigned threads = 1);

// |1/2 - 1/2 * sum_{i=1..n} C(n,i) (-1)^(i+1) 4^-i| in exact rationals.
double analytic_advantage(std::size_t n);
// (3/4)^n / 2.
double closed_form_advantage(std::size_t n);

// ---- Monte-Carlo rates ----

struct RateEstimate {
    std::uint64_t trials = 0;
    std::uint64_t hits = 0;
    double rate = 0;
    double std_err = 0;
    double wilson_lo = 0;
    double wilson_hi = 0;
};

RateEstimate make_rate(std::uint64_t hits, std::uint64_t trials, double z = 3.0);

// Fraction of PRG wires that decode as distress under a fresh key.
RateEstimate measure_false_positive_rate(const Profile& profile, std::uint64_t trials, std::uint64_t seed,
                                         unsigned threads = 1);
// Fraction of uniform wires with ciphertext structure.
RateEstimate measure_structure_rate(const Profile& profile, std::uint64_t trials, std::uint64_t seed,
                                    unsigned threads = 1);
// 2^-(m_d + 2).
double model_false_positive_rate(const BitLayout& layout);

// ---- scenarios ----

struct ScenarioResult {
    std::vector<DistressEvent> events;
    std::vector<std::string> transcript;  // NDJSON lines
    std::string summary_json;             // events, outcomes and counts
};

// Script: {"profile", "seed", "n_max"?, "pending_timeout"?, "steps": [...]}
// with steps {"op": "enroll_server", "name"}, {"op": "enroll_user", "name",
// "sites"?, "instruction"?}, {"op": "hello", "server", "count"?},
// {"op": "distress", "user", "server"}, {"op": "lose", "user", "server"},
// {"op": "tick", "by"}. Unknown principals or ops throw ScriptError.
ScenarioResult scenario_run(const std::string& script_json, std::optional<std::uint64_t> seed_override = {});

// ---- guarantee suite ----

struct GuaranteeCheck {
    std::string name;
    std::string expected;
    std::string observed;
    bool pass = false;
};

// Scripted attacks and the honest run, on the production profile.
std::vector<GuaranteeCheck> run_guarantee_suite(std::uint64_t seed);

}  // namespace distress
