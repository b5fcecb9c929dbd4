#include "distress/harness.hpp"

namespace distress {

namespace {

// Principals wired by direct handler calls, so attack frames can be built and
// injected where the network would carry them.
struct Bench {
    Profile profile = production_profile();
    Prg prg;
    SigKeyPair root;
    std::unique_ptr<Dcp> dcp;
    std::vector<std::unique_ptr<Webserver>> servers;
    std::vector<std::unique_ptr<User>> users;
    std::uint64_t session = 1;
    std::uint64_t conn = 1;

    Bench(Prg p, unsigned n_max) : prg(std::move(p)) {
        DcpConfig cfg;
        cfg.n_max = n_max;
        cfg.pbkdf2_iterations = 1000;
        root = sig_keygen(profile, prg);
        dcp = std::make_unique<Dcp>(profile, root.vk, cfg);
    }

    Webserver& add_server(const std::string& name) {
        const SigKeyPair key = sig_keygen(profile, prg);
        servers.push_back(std::make_unique<Webserver>(profile, name, cert_issue(profile, root, name, key.vk), key));
        Webserver& w = *servers.back();
        w.finish_enrolment(dcp->on_server_enrol(w.begin_enrolment(prg), prg));
        return w;
    }

    User& add_user(const std::string& name) {
        users.push_back(std::make_unique<User>(profile, name, "pw", UserInfo{"contact " + name, "footer:" + name}));
        User& u = *users.back();
        const std::uint64_t s = session++;
        const Bytes list = dcp->on_user_hello(s, u.enrol_hello(prg), prg);
        u.finish_enrolment(dcp->on_website_selection(s, u.select_websites(list), prg));
        return u;
    }

    Bytes forward(User& u, Webserver& w) {
        const auto fwd = w.on_client_random(conn++, u.make_distress_nonce(w.identity(), prg), 0, prg);
        if (!fwd) throw Error(ErrorCode::ContractViolation, "distress nonce not forwarded");
        return *fwd;
    }

    Bytes craft_forward(Webserver& w, u128 id, const MacTag& tag) {
        const DerivedKeys k = kdf(w.shared_seed(), kServerDcpLabel, profile.key_bytes);
        const Bytes c_bc = sym_encrypt(k.enc, joined({id_bytes(profile.layout, id), tag.bytes}), prg);
        const Bytes nonce_b = prg.bytes(kNonceBytes);
        const Bytes b = to_bytes(w.identity());
        return Message{MsgType::DistressForward, {b, c_bc, nonce_b}, hmac_sha256(k.mac, joined({b, c_bc, nonce_b}))}
            .encode();
    }
};

std::string enrol_outcome(const Bytes& frame) {
    const Message m = Message::decode(frame);
    return m.type == MsgType::EnrolReject ? m.text(0) : "accepted";
}

std::string forward_outcome(const ForwardOutcome& r) { return r.accepted ? "accepted" : to_string(*r.reason); }

template <typename F>
std::string reply_outcome(F&& f) {
    try {
        f();
        return "accepted";
    } catch (const Rejected& r) {
        return to_string(r.reason());
    }
}

void add(std::vector<GuaranteeCheck>& out, std::string name, std::string expected, std::string observed) {
    const bool pass = expected == observed;
    out.push_back({std::move(name), std::move(expected), std::move(observed), pass});
}

std::string yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

std::vector<GuaranteeCheck> run_guarantee_suite(std::uint64_t seed) {
    std::vector<GuaranteeCheck> out;
    const Prg base(seed);
    const std::string accepted = "accepted";
    const std::string bad_tag = to_string(RejectReason::BadTag);

    {  // server enrolment attacks
        Bench b(base.derive("guarantee-enrol", 0), 8);
        Webserver& w = b.add_server("bank.example");

        const SigKeyPair rogue = sig_keygen(b.profile, b.prg);
        const SigKeyPair k1 = sig_keygen(b.profile, b.prg);
        Webserver forged(b.profile, "shop.example", cert_issue(b.profile, rogue, "shop.example", k1.vk), k1);
        add(out, "certificate from a non-root issuer", to_string(RejectReason::CertInvalid),
            enrol_outcome(b.dcp->on_server_enrol(forged.begin_enrolment(b.prg), b.prg)));

        const SigKeyPair k2 = sig_keygen(b.profile, b.prg);
        Webserver misnamed(b.profile, "shop.example", cert_issue(b.profile, b.root, "other.example", k2.vk), k2);
        add(out, "certificate for another identity", to_string(RejectReason::CertInvalid),
            enrol_outcome(b.dcp->on_server_enrol(misnamed.begin_enrolment(b.prg), b.prg)));

        const SigKeyPair k3 = sig_keygen(b.profile, b.prg);
        Webserver honest(b.profile, "news.example", cert_issue(b.profile, b.root, "news.example", k3.vk), k3);
        const Message captured = Message::decode(honest.begin_enrolment(b.prg));
        Message replayed = captured;
        replayed.fields[0] = point_bytes(b.profile.curve, dh_keygen(b.profile, b.prg).share);
        add(out, "signature replayed with a fresh DH share", to_string(RejectReason::SigInvalid),
            enrol_outcome(b.dcp->on_server_enrol(replayed.encode(), b.prg)));
        Message swapped = captured;
        swapped.fields[3] = point_bytes(b.profile.curve, b.profile.scheme().keygen(b.prg).pk);
        add(out, "signature replayed with a substituted encryption key", to_string(RejectReason::SigInvalid),
            enrol_outcome(b.dcp->on_server_enrol(swapped.encode(), b.prg)));

        Webserver again(b.profile, "bank.example", w.certificate(), w.signing_key());
        add(out, "duplicate server identity", to_string(RejectReason::Duplicate),
            enrol_outcome(b.dcp->on_server_enrol(again.begin_enrolment(b.prg), b.prg)));
    }

    {  // replays and the DCP filter
        Bench b(base.derive("guarantee-replay", 0), 8);
        Webserver& w = b.add_server("bank.example");
        User& alice = b.add_user("alice");
        const NonceWire nonce = alice.make_distress_nonce(w.identity(), b.prg);
        const Bytes fwd = *w.on_client_random(b.conn++, nonce, 0, b.prg);
        add(out, "first forward", accepted, forward_outcome(b.dcp->on_forward(fwd, 0, b.prg)));
        add(out, "forward replayed verbatim", bad_tag, forward_outcome(b.dcp->on_forward(fwd, 1, b.prg)));
        const Bytes rewrapped = *w.on_client_random(b.conn++, nonce, 1, b.prg);
        add(out, "tag replayed under a fresh server nonce", bad_tag,
            forward_outcome(b.dcp->on_forward(rewrapped, 1, b.prg)));

        Message unknown = Message::decode(b.forward(alice, w));
        unknown.fields[0] = to_bytes("nobody.example");
        add(out, "forward from an unknown server", to_string(RejectReason::UnknownServer),
            forward_outcome(b.dcp->on_forward(unknown.encode(), 2, b.prg)));
        Message flipped = Message::decode(b.forward(alice, w));
        flipped.auth[0] ^= 1;
        add(out, "forward with a bad outer MAC", to_string(RejectReason::BadOuterMac),
            forward_outcome(b.dcp->on_forward(flipped.encode(), 2, b.prg)));
        add(out, "forward for an unknown user", to_string(RejectReason::UnknownUser),
            forward_outcome(b.dcp->on_forward(
                b.craft_forward(w, alice.credentials().id ^ 1, MacTag::from_value(0, b.profile.layout.m_t)), 2,
                b.prg)));
        add(out, "events after the attacks", "1", std::to_string(b.dcp->events().size()));
    }

    {  // sequence window
        const unsigned n_max = 8;
        Bench b(base.derive("guarantee-window", 0), n_max);
        Webserver& w = b.add_server("bank.example");
        User& alice = b.add_user("alice");
        User& bob = b.add_user("bob");
        for (unsigned i = 0; i < n_max; ++i) (void)alice.make_distress_nonce(w.identity(), b.prg);
        add(out, "n_max lost signals then distress", accepted,
            forward_outcome(b.dcp->on_forward(b.forward(alice, w), 0, b.prg)));
        for (unsigned i = 0; i <= n_max; ++i) (void)bob.make_distress_nonce(w.identity(), b.prg);
        add(out, "n_max + 1 lost signals then distress", bad_tag,
            forward_outcome(b.dcp->on_forward(b.forward(bob, w), 0, b.prg)));
    }

    {  // reply and confirmation freshness
        Bench b(base.derive("guarantee-reply", 0), 8);
        Webserver& w = b.add_server("bank.example");
        User& alice = b.add_user("alice");
        const std::uint64_t c1 = b.conn;
        const ForwardOutcome first = b.dcp->on_forward(b.forward(alice, w), 0, b.prg);
        w.on_reply(first.reply, 1);
        const PageEmbed old_page = w.page_for(c1, b.prg);
        add(out, "confirmation on the honest page", "true", yes_no(alice.verify_confirmation(old_page)));

        const Bytes fwd2 = b.forward(alice, w);
        add(out, "reply with a stale server nonce", to_string(RejectReason::StaleNonce),
            reply_outcome([&] { w.on_reply(first.reply, 2); }));
        add(out, "old confirmation after a newer distress", "false", yes_no(alice.verify_confirmation(old_page)));
        const ForwardOutcome second = b.dcp->on_forward(fwd2, 3, b.prg);
        Message altered = Message::decode(second.reply);
        altered.fields[1][0] ^= 0x40;
        add(out, "reply with an altered confirmation", to_string(RejectReason::BadMac),
            reply_outcome([&] { w.on_reply(altered.encode(), 3); }));
        add(out, "genuine reply after the attacks", accepted, reply_outcome([&] { w.on_reply(second.reply, 3); }));
    }

    {  // honest run over the simulated network
        WorldConfig cfg;
        cfg.dcp.pbkdf2_iterations = 1000;
        World world(production_profile(), static_cast<std::uint64_t>(base.derive("guarantee-honest", 0).bits(64)), cfg);
        world.enroll_server("bank.example");
        world.enroll_user("alice");
        std::uint64_t false_forwards = 0;
        for (int i = 0; i < 200; ++i) false_forwards += world.normal_hello("bank.example") ? 1 : 0;
        const DistressResult r = world.distress("alice", "bank.example");
        add(out, "forwards from normal traffic", "0", std::to_string(false_forwards));
        add(out, "honest distress accepted", accepted,
            r.dcp_reject ? to_string(*r.dcp_reject) : (r.server_reject ? to_string(*r.server_reject) : accepted));
        add(out, "honest distress confirmed", "true", yes_no(r.confirmed));
        add(out, "honest run events", "1", std::to_string(world.dcp().events().size()));
    }
    return out;
}

}  // namespace distress
