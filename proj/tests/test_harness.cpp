#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "distress/harness.hpp"

using namespace distress;

namespace {

const char* kScript = R"({
  "profile": "production",
  "seed": 21,
  "pbkdf2_iterations": 1000,
  "steps": [
    {"op": "enroll_server", "name": "bank.example"},
    {"op": "enroll_server", "name": "news.example"},
    {"op": "enroll_user", "name": "alice", "sites": ["bank.example"]},
    {"op": "hello", "server": "bank.example", "count": 500},
    {"op": "distress", "user": "alice", "server": "bank.example"},
    {"op": "hello", "server": "news.example", "count": 500},
    {"op": "tick", "by": 5}
  ]
})";

}  // namespace

TEST_CASE("network delivers per link in order") {
    SimNetwork net;
    std::vector<std::uint64_t> seen;
    net.add_tap([&](const Frame& f) { seen.push_back(f.seq); });
    net.send("a", "b", "record", {1}, 0);
    net.send("a", "c", "record", {2}, 0);
    net.send("a", "b", "record", {3}, 1);
    CHECK(net.in_flight() == 3);
    CHECK(net.receive("a", "b").payload == Bytes{1});
    CHECK(net.receive("a", "c").payload == Bytes{2});
    const Frame last = net.receive("a", "b");
    CHECK(last.payload == Bytes{3});
    CHECK(last.tick == 1);
    CHECK(seen == std::vector<std::uint64_t>{0, 1, 2});
    CHECK(net.in_flight() == 0);
    try {
        (void)net.receive("a", "b");
        FAIL("empty link delivered");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ScriptError);
    }
}

TEST_CASE("honest world run and tap passivity") {
    WorldConfig cfg;
    cfg.dcp.pbkdf2_iterations = 1000;
    auto run = [&](bool tapped) {
        World world(production_profile(), 5, cfg);
        TranscriptTap tap;
        if (tapped) world.network().add_tap(tap.tap());
        world.enroll_server("bank.example");
        world.enroll_user("alice");
        for (int i = 0; i < 20; ++i) CHECK_FALSE(world.normal_hello("bank.example"));
        const DistressResult r = world.distress("alice", "bank.example");
        CHECK(r.forwarded);
        CHECK_FALSE(r.dcp_reject.has_value());
        CHECK_FALSE(r.server_reject.has_value());
        CHECK(r.confirmed);
        CHECK(world.network().in_flight() == 0);
        return std::make_tuple(world.dcp().events(), world.network().frames_sent(), tap.lines());
    };
    const auto [ev_plain, frames_plain, lines_plain] = run(false);
    const auto [ev_tapped, frames_tapped, lines_tapped] = run(true);
    CHECK(ev_plain == ev_tapped);
    CHECK(frames_plain == frames_tapped);
    CHECK(lines_plain.empty());
    CHECK(lines_tapped.size() == frames_tapped);
    REQUIRE(ev_tapped.size() == 1);
    CHECK(ev_tapped[0].server == "bank.example");

    // exactly one forward crossed the network
    int forwards = 0;
    for (const auto& line : lines_tapped) {
        const auto j = nlohmann::json::parse(line);
        forwards += j.at("kind") == "forward" ? 1 : 0;
    }
    CHECK(forwards == 1);
}

TEST_CASE("world script errors") {
    WorldConfig cfg;
    cfg.dcp.pbkdf2_iterations = 1000;
    World world(toy_profile(), 1, cfg);
    CHECK_THROWS_AS(world.enroll_server("dcp"), Error);
    CHECK_THROWS_AS((void)world.normal_hello("nobody"), Error);
    CHECK_THROWS_AS((void)world.distress("ghost", "nobody"), Error);
    world.enroll_server("bank.example");
    CHECK_THROWS_AS(world.enroll_user("bank.example"), Error);
    world.enroll_user("alice");
    world.lose_distress("alice", "bank.example");
    const DistressResult r = world.distress("alice", "bank.example");
    CHECK(r.confirmed);
    CHECK(world.dcp().events().size() == 1);
}

TEST_CASE("challenger") {
    const Profile p = production_profile();
    const NonceCodec codec = p.codec();
    Prg prg(30);
    const McegKeyPair key = codec.scheme().keygen(prg);
    const DistressPayload payload{{7, p.layout.m_i}, {11, p.layout.m_t}};

    const GameTranscript t0 = run_challenger(codec, key.pk, 4, false, payload, prg, {to_bytes("x")});
    CHECK(t0.nonces.size() == 4);
    CHECK(t0.x_list.size() == 4);
    CHECK_FALSE(t0.j.has_value());
    for (const auto& w : t0.nonces) CHECK_FALSE(codec.decode(w, key.sk).has_value());
    CHECK_THROWS_AS((void)run_challenger(codec, key.pk, 0, false, payload, prg), Error);

    // j is uniform over [0, n) and the encoded nonce sits exactly there
    constexpr std::size_t n = 8;
    constexpr int runs = 10000;
    std::array<int, n> hist{};
    for (int r = 0; r < runs; ++r) {
        const GameTranscript t = run_challenger(codec, key.pk, n, true, payload, prg);
        REQUIRE(t.j.has_value());
        ++hist[*t.j];
        if (r < 300) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto d = codec.decode(t.nonces[i], key.sk);
                CHECK(d.has_value() == (i == *t.j));
                if (d) CHECK(*d == payload);
            }
        }
    }
    double chi2 = 0;
    const double expected = static_cast<double>(runs) / n;
    for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
    CHECK(chi2 < 18.475);  // chi-square, 7 dof, alpha = 0.01
}

TEST_CASE("adversary") {
    const Profile p = production_profile();
    const NonceCodec codec = p.codec();
    Prg prg(31);
    const McegKeyPair key = codec.scheme().keygen(prg);
    const DistressPayload payload{{1, p.layout.m_i}, {2, p.layout.m_t}};
    // with an encoded nonce present the adversary always reaches the coin
    int ones = 0;
    for (int i = 0; i < 2000; ++i) {
        const GameTranscript t = run_challenger(codec, key.pk, 3, true, payload, prg);
        ones += appendix_b_adversary(codec.scheme(), t, prg) ? 1 : 0;
    }
    CHECK(std::abs(ones - 1000) < 4 * std::sqrt(500.0));
    // a transcript with no structured nonce is always answered 0
    GameTranscript empty;
    empty.n = 1;
    NonceWire w;
    w.bytes.fill(0xff);  // x slot >= q
    empty.nonces.push_back(w);
    for (int i = 0; i < 50; ++i) CHECK_FALSE(appendix_b_adversary(codec.scheme(), empty, prg));
}

TEST_CASE("analytic advantage") {
    CHECK(analytic_advantage(1) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(analytic_advantage(2) == doctest::Approx(0.28125).epsilon(1e-15));
    for (std::size_t n = 1; n <= 64; ++n) {
        CAPTURE(n);
        CHECK(std::abs(analytic_advantage(n) - closed_form_advantage(n)) < 1e-12);
    }
    CHECK_THROWS_AS((void)analytic_advantage(0), Error);
}

TEST_CASE("estimated advantage") {
    const Profile p = production_profile();
    for (std::size_t n : {1u, 8u}) {
        CAPTURE(n);
        const AdvantageEstimate e = estimate_advantage(p, n, 20000, 40 + n, 4);
        CHECK(e.trials == 20000);
        CHECK(e.p_hat_b1 == doctest::Approx(0.5).epsilon(0.05));
        CHECK(std::abs(e.advantage - closed_form_advantage(n)) < 4 * e.std_err);
    }
    // thread count does not change the estimate
    const AdvantageEstimate a = estimate_advantage(p, 2, 9000, 7, 1);
    const AdvantageEstimate b = estimate_advantage(p, 2, 9000, 7, 3);
    CHECK(a.p_hat_b0 == b.p_hat_b0);
    CHECK(a.p_hat_b1 == b.p_hat_b1);
    CHECK_THROWS_AS((void)estimate_advantage(p, 2, 999, 7), Error);
}

TEST_CASE("rates") {
    const RateEstimate zero = make_rate(0, 1000);
    CHECK(zero.rate == 0);
    CHECK(zero.wilson_lo == 0);
    CHECK(zero.wilson_hi > 0);
    const RateEstimate half = make_rate(500, 1000);
    CHECK(half.wilson_lo < 0.5);
    CHECK(half.wilson_hi > 0.5);

    const Profile prod = production_profile();
    const RateEstimate s = measure_structure_rate(prod, 100000, 3, 4);
    CHECK(s.wilson_lo < 0.25);
    CHECK(s.wilson_hi > 0.25);

    // production marker is 24 bits: silence over 10^5 PRG nonces
    const RateEstimate fp_prod = measure_false_positive_rate(prod, 100000, 4, 4);
    CHECK(fp_prod.hits == 0);
    CHECK(model_false_positive_rate(prod.layout) == std::ldexp(1.0, -26));

    // toy marker is 4 bits: the rate sits near 2^-6
    const Profile toy = toy_profile();
    const RateEstimate fp_toy = measure_false_positive_rate(toy, 200000, 5, 4);
    const double model = model_false_positive_rate(toy.layout);
    CHECK(model == 1.0 / 64);
    CHECK(fp_toy.rate == doctest::Approx(model).epsilon(0.15));

    // a 1-bit marker stresses the filter: about 2^-3
    Profile stress = toy;
    stress.layout.m_d = 1;
    stress.layout.m_i = 3;
    stress.layout.m_t = 6;
    const RateEstimate fp_stress = measure_false_positive_rate(stress, 100000, 6, 4);
    CHECK(fp_stress.rate == doctest::Approx(model_false_positive_rate(stress.layout)).epsilon(0.1));
}

TEST_CASE("scenario") {
    const ScenarioResult a = scenario_run(kScript);
    const ScenarioResult b = scenario_run(kScript);
    CHECK(a.summary_json == b.summary_json);
    CHECK(a.transcript == b.transcript);
    CHECK(a.events == b.events);
    REQUIRE(a.events.size() == 1);
    CHECK(a.events[0].server == "bank.example");

    const auto summary = nlohmann::json::parse(a.summary_json);
    CHECK(summary.at("normal_hellos") == 1000);
    CHECK(summary.at("false_forwards") == 0);
    CHECK(summary.at("distress").size() == 1);
    CHECK(summary.at("distress")[0].at("confirmed") == true);
    CHECK(summary.at("frames") == a.transcript.size());
    for (const auto& line : a.transcript) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("seq"));
        CHECK(j.at("hex").is_string());
    }

    const ScenarioResult c = scenario_run(kScript, 22);
    CHECK(c.transcript != a.transcript);
    CHECK(c.events.size() == 1);
}

TEST_CASE("scenario errors") {
    auto code_of = [](const std::string& script) {
        try {
            (void)scenario_run(script);
        } catch (const Error& e) {
            return e.code();
        }
        FAIL("script accepted");
        return ErrorCode::ContractViolation;
    };
    CHECK(code_of("{") == ErrorCode::ScriptError);
    CHECK(code_of(R"({"profile": "toy"})") == ErrorCode::ScriptError);
    CHECK(code_of(R"({"profile": "toy", "steps": [{"op": "dance"}]})") == ErrorCode::ScriptError);
    CHECK(code_of(R"({"profile": "toy", "steps": [{"op": "hello", "server": "x"}]})") == ErrorCode::ScriptError);
    CHECK(code_of(R"({"profile": "toy", "steps": [{"op": "distress", "user": "u", "server": "x"}]})") ==
          ErrorCode::ScriptError);
    CHECK(code_of(R"({"profile": "huge", "steps": []})") == ErrorCode::ParamsInvalid);
}

TEST_CASE("guarantee suite") {
    const auto checks = run_guarantee_suite(17);
    CHECK(checks.size() >= 18);
    for (const auto& c : checks) {
        CAPTURE(c.name);
        CAPTURE(c.observed);
        CHECK(c.pass);
        CHECK(c.expected == c.observed);
    }
}
