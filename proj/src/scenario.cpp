#include "distress/harness.hpp"
#include "json.hpp"

namespace distress {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void script_fail(const std::string& what) { throw Error(ErrorCode::ScriptError, what); }

const json& field(const json& j, const char* key) {
    if (!j.contains(key)) script_fail(std::string("missing field ") + key);
    return j.at(key);
}

std::string str_field(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_string()) script_fail(std::string(key) + " must be a string");
    return v.get<std::string>();
}

std::uint64_t uint_field(const json& j, const char* key, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_unsigned()) script_fail(std::string(key) + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

Profile scenario_profile(const json& script) {
    const json& p = field(script, "profile");
    if (p.is_string()) return builtin_profile(p.get<std::string>());
    if (p.is_object()) {
        Profile profile = profile_from_json(p.dump());
        validate_profile(profile);
        return profile;
    }
    script_fail("profile must be a name or an object");
}

ordered_json outcome_json(const std::string& user, const std::string& server, const DistressResult& r) {
    ordered_json o;
    o["user"] = user;
    o["server"] = server;
    o["forwarded"] = r.forwarded;
    o["dcp_reject"] = r.dcp_reject ? ordered_json(to_string(*r.dcp_reject)) : ordered_json(nullptr);
    o["server_reject"] = r.server_reject ? ordered_json(to_string(*r.server_reject)) : ordered_json(nullptr);
    o["confirmed"] = r.confirmed;
    return o;
}

}  // namespace

ScenarioResult scenario_run(const std::string& script_json, std::optional<std::uint64_t> seed_override) {
    json script;
    try {
        script = json::parse(script_json);
    } catch (const json::exception& e) {
        script_fail(std::string("script is not JSON: ") + e.what());
    }
    if (!script.is_object()) script_fail("script must be an object");

    const Profile profile = scenario_profile(script);
    const std::uint64_t seed = seed_override ? *seed_override : uint_field(script, "seed", 0);
    WorldConfig cfg;
    cfg.dcp.n_max = static_cast<unsigned>(uint_field(script, "n_max", cfg.dcp.n_max));
    cfg.dcp.pbkdf2_iterations = static_cast<unsigned>(uint_field(script, "pbkdf2_iterations", cfg.dcp.pbkdf2_iterations));
    cfg.server.pending_timeout = uint_field(script, "pending_timeout", cfg.server.pending_timeout);

    World world(profile, seed, cfg);
    TranscriptTap tap;
    world.network().add_tap(tap.tap());

    const json& steps = field(script, "steps");
    if (!steps.is_array()) script_fail("steps must be an array");

    std::uint64_t hellos = 0;
    std::uint64_t false_forwards = 0;
    std::uint64_t lost = 0;
    ordered_json outcomes = ordered_json::array();
    for (const json& step : steps) {
        if (!step.is_object()) script_fail("step must be an object");
        const std::string op = str_field(step, "op");
        if (op == "enroll_server") {
            world.enroll_server(str_field(step, "name"));
        } else if (op == "enroll_user") {
            std::vector<std::string> sites;
            if (step.contains("sites")) {
                if (!step.at("sites").is_array()) script_fail("sites must be an array");
                for (const auto& s : step.at("sites")) {
                    if (!s.is_string()) script_fail("site names must be strings");
                    sites.push_back(s.get<std::string>());
                }
            }
            const std::string instruction = step.contains("instruction") ? str_field(step, "instruction") : "";
            world.enroll_user(str_field(step, "name"), sites, instruction);
        } else if (op == "hello") {
            const std::string server = str_field(step, "server");
            const std::uint64_t count = uint_field(step, "count", 1);
            for (std::uint64_t i = 0; i < count; ++i) {
                false_forwards += world.normal_hello(server) ? 1 : 0;
                ++hellos;
            }
        } else if (op == "distress") {
            const std::string user = str_field(step, "user");
            const std::string server = str_field(step, "server");
            if (!world.has_user(user)) script_fail("unknown user " + user);
            outcomes.push_back(outcome_json(user, server, world.distress(user, server)));
        } else if (op == "lose") {
            world.lose_distress(str_field(step, "user"), str_field(step, "server"));
            ++lost;
        } else if (op == "tick") {
            world.advance(uint_field(step, "by", 1));
        } else {
            script_fail("unknown op " + op);
        }
    }

    ScenarioResult out;
    out.events = world.dcp().events();
    out.transcript = tap.lines();

    ordered_json summary;
    summary["profile"] = profile.name;
    summary["seed"] = seed;
    summary["frames"] = world.network().frames_sent();
    summary["normal_hellos"] = hellos;
    summary["false_forwards"] = false_forwards;
    summary["lost"] = lost;
    summary["distress"] = std::move(outcomes);
    ordered_json events = ordered_json::array();
    for (const auto& e : out.events) events.push_back(ordered_json::parse(e.to_json_line()));
    summary["events"] = std::move(events);
    out.summary_json = summary.dump(2) + "\n";
    return out;
}

}  // namespace distress
